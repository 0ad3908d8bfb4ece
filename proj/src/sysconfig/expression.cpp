#include "cosim/sysconfig/expression.hpp"

#include <cctype>
#include <charconv>
#include <set>

namespace cosim::sysconfig {

namespace {

class parser {
public:
    parser(std::string_view text, bool allow_aggregates)
        : text_(text), allow_aggregates_(allow_aggregates) {}

    expression parse()
    {
        expression e;
        e.clauses.push_back(parse_conjunction());
        while (accept_keyword("or")) e.clauses.push_back(parse_conjunction());
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    std::vector<comparison> parse_conjunction()
    {
        std::vector<comparison> out;
        out.push_back(parse_comparison());
        while (accept_keyword("and")) out.push_back(parse_comparison());
        return out;
    }

    comparison parse_comparison()
    {
        comparison c;
        std::string first = parse_identifier();
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(') {
            if (first == "min") c.agg = aggregate::min;
            else if (first == "max") c.agg = aggregate::max;
            else if (first == "final") c.agg = aggregate::final;
            else fail("unknown aggregate '" + first + "'");
            if (!allow_aggregates_) fail("aggregates are not allowed here");
            ++pos_;
            c.name = parse_identifier();
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
            ++pos_;
        } else {
            c.name = std::move(first);
        }
        c.op = parse_op();
        c.literal = parse_literal();
        return c;
    }

    std::string parse_identifier()
    {
        skip_ws();
        const auto start = pos_;
        auto ident_char = [](char ch, bool first) {
            return std::isalpha(static_cast<unsigned char>(ch)) || ch == '_' ||
                   (!first && (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.'));
        };
        while (pos_ < text_.size() && ident_char(text_[pos_], pos_ == start)) ++pos_;
        if (pos_ == start) fail("expected identifier");
        return std::string(text_.substr(start, pos_ - start));
    }

    compare_op parse_op()
    {
        skip_ws();
        auto rest = text_.substr(pos_);
        auto take = [&](std::string_view tok, compare_op op) -> std::optional<compare_op> {
            if (rest.substr(0, tok.size()) == tok) {
                pos_ += tok.size();
                return op;
            }
            return std::nullopt;
        };
        for (auto [tok, op] : {std::pair<std::string_view, compare_op>{"<=", compare_op::le},
                               {"\xE2\x89\xA4", compare_op::le},
                               {">=", compare_op::ge},
                               {"\xE2\x89\xA5", compare_op::ge},
                               {"==", compare_op::eq},
                               {"<", compare_op::lt},
                               {">", compare_op::gt},
                               {"=", compare_op::eq}}) {
            if (auto r = take(tok, op)) return *r;
        }
        fail("expected comparison operator");
    }

    scalar parse_literal()
    {
        skip_ws();
        if (pos_ >= text_.size()) fail("expected literal");
        const char ch = text_[pos_];
        if (ch == '\'' || ch == '"') {
            const auto end = text_.find(ch, pos_ + 1);
            if (end == std::string_view::npos) fail("unterminated string literal");
            std::string s(text_.substr(pos_ + 1, end - pos_ - 1));
            pos_ = end + 1;
            return s;
        }
        if (std::isalpha(static_cast<unsigned char>(ch))) {
            auto word = parse_identifier();
            if (word == "true") return true;
            if (word == "false") return false;
            fail("expected literal, got '" + word + "'");
        }
        double value = 0.0;
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        if (*first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{}) fail("expected numeric literal");
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        return value;
    }

    bool accept_keyword(std::string_view kw)
    {
        skip_ws();
        if (text_.substr(pos_, kw.size()) != kw) return false;
        const auto after = pos_ + kw.size();
        if (after < text_.size() && !std::isspace(static_cast<unsigned char>(text_[after])))
            return false;
        pos_ = after;
        return true;
    }

    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw expression_error(msg + " at offset " + std::to_string(pos_) + " in '" +
                               std::string(text_) + "'");
    }

    std::string_view text_;
    bool allow_aggregates_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<std::string> expression::referenced_names() const
{
    std::set<std::string> names;
    for (const auto& clause : clauses)
        for (const auto& c : clause) names.insert(c.name);
    return {names.begin(), names.end()};
}

bool expression::uses_aggregates() const
{
    for (const auto& clause : clauses)
        for (const auto& c : clause)
            if (c.agg != aggregate::none) return true;
    return false;
}

expression parse_expression(std::string_view text, bool allow_aggregates)
{
    return parser(text, allow_aggregates).parse();
}

bool compare(const scalar& lhs, compare_op op, const scalar& rhs)
{
    if (lhs.index() != rhs.index())
        throw expression_error("cannot compare " + to_string(lhs) + " with " + to_string(rhs));
    if (const auto* a = std::get_if<double>(&lhs)) {
        const double b = std::get<double>(rhs);
        switch (op) {
        case compare_op::lt: return *a < b;
        case compare_op::le: return *a <= b;
        case compare_op::eq: return *a == b;
        case compare_op::ge: return *a >= b;
        case compare_op::gt: return *a > b;
        }
    }
    if (op != compare_op::eq) throw expression_error("only '=' applies to non-numeric values");
    return lhs == rhs;
}

bool evaluate(const expression& e, const operand_lookup& lookup)
{
    for (const auto& clause : e.clauses) {
        bool all = true;
        for (const auto& c : clause) {
            auto value = lookup(c.agg, c.name);
            if (!value) throw expression_error("unknown operand '" + c.name + "'");
            if (!compare(*value, c.op, c.literal)) {
                all = false;
                break;
            }
        }
        if (all) return true;
    }
    return false;
}

} // namespace cosim::sysconfig
