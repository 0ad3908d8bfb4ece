#pragma once

#include <stdexcept>
#include <string>

namespace cosim {

/// Root of every exception thrown by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A document does not match its schema. `path` is a JSON-pointer-like location.
class schema_error : public error {
public:
    schema_error(std::string path, const std::string& what)
        : error("schema error at " + path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class io_error : public error {
public:
    io_error(std::string path, const std::string& what)
        : error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace cosim
