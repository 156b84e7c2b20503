#pragma once

#include <string>

#include "textsr/config.hpp"

namespace textsr {

std::string config_to_json(const Config& c);
Config config_from_json(const std::string& text);
Config load_config(const std::string& path);
void save_config(const std::string& path, const Config& c);
uint64_t config_hash(const Config& c);

} // namespace textsr
