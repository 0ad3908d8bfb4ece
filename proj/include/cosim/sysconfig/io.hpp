#pragma once

#include "cosim/sysconfig/container.hpp"

#include <filesystem>

#include <json.hpp>

namespace cosim::sysconfig {

container container_from_json(const nlohmann::json& j, const std::string& path = "");
nlohmann::json to_json(const container& c);

container load_container(const std::filesystem::path& file);

} // namespace cosim::sysconfig
