#pragma once

#include <string>
#include <vector>

namespace sctrim::cli {

enum class ValueKind { text, integer, real, seed, list };

struct KeyInfo {
    std::string key;  // JSON key; the flag is --key with '_' replaced by '-'
    ValueKind kind;
    std::string help;
};

std::vector<KeyInfo> config_keys();

/// Comma separated, blanks dropped.
std::vector<std::string> split_list(const std::string& s);

}  // namespace sctrim::cli
