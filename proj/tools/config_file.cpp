#include "config_file.hpp"

#include <fstream>

#include "plab/errors.hpp"

namespace plab::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

}  // namespace

// key -> documented default
const std::map<std::string, std::map<std::string, std::string>>& config_schema() {
    static const std::map<std::string, std::map<std::string, std::string>> schema = {
        {"rotation",
         {{"theta_deg", "5"},
          {"steps", "288"},
          {"digits", "native"},
          {"mode", "step"},
          {"record_every", "1"},
          {"tie", "half-away"}}},
        {"lorenz",
         {{"digits_a", "native"},
          {"digits_b", "7"},
          {"h", "0.01"},
          {"t_max", "50"},
          {"threshold", "1"},
          {"sigma", "10"},
          {"rho", "28"},
          {"beta", "2.6666666666666665"},
          {"x0", "1"},
          {"y0", "1"},
          {"z0", "1"},
          {"sample_every", "1"},
          {"restart_truncate", "(off)"},
          {"restart_at", "t_max/2"},
          {"tie", "half-away"}}},
        {"qc", {{"digits_list", "native,12,7"}, {"format", "text"}}},
        {"output", {{"out", "-"}, {"gnuplot_script", "(off)"}}},
    };
    return schema;
}

ConfigValues parse_config(std::istream& in) {
    const auto& schema = config_schema();
    ConfigValues values;
    std::string section;
    std::string raw;
    for (int line = 1; std::getline(in, raw); ++line) {
        const auto comment = raw.find_first_of("#;");
        const std::string text = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') fail(line, "malformed section header");
            section = trim(text.substr(1, text.size() - 2));
            if (!schema.count(section)) fail(line, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) fail(line, "expected key = value");
        if (section.empty()) fail(line, "key outside of a section");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (!schema.at(section).count(key)) fail(line, "unknown key '" + key + "' in [" + section + "]");
        if (value.empty()) fail(line, "empty value for '" + key + "'");
        if (!values[section].emplace(key, value).second)
            fail(line, "duplicate key '" + key + "' in [" + section + "]");
    }
    return values;
}

ConfigValues load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open config file '" + path + "'");
    return parse_config(in);
}

}  // namespace plab::cli
