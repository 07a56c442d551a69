#pragma once

#include <string>

#include <json.hpp>

namespace anomkit {

// %.17g — the serialization format for every JSON number this tool writes
std::string format_double_17(double v);

// Deterministic dump: sorted object keys (nlohmann default), doubles at 17
// significant digits, 2-space indentation. Byte-stable across runs.
std::string dump_deterministic(const nlohmann::json& j, int indent = 2);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace anomkit
