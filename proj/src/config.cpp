#include "lionmdp/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lionmdp {

namespace {

std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("key '" + key + "': '" + text + "' is not a number");
    }
    if (used != text.size()) throw std::invalid_argument("key '" + key + "': '" + text + "' is not a number");
    return v;
}

int parse_int(const std::string& key, const std::string& text) {
    int v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw std::invalid_argument("key '" + key + "': '" + text + "' is not an integer");
    return v;
}

} // namespace

KeyValues parse_key_values(std::string_view text) {
    KeyValues kv;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("line " + std::to_string(line_no) + ": empty key");
        kv[std::string(key)] = std::string(value);
    }
    return kv;
}

KeyValues read_key_values_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_key_values(buf.str());
}

void apply_key_values(LionParams& p, const KeyValues& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "alpha") p.alpha = parse_double(key, value);
        else if (key == "beta") p.beta = parse_double(key, value);
        else if (key == "lambda") p.lambda = parse_double(key, value);
        else if (key == "m") p.m = parse_int(key, value);
        else if (key == "M") p.M = parse_int(key, value);
        else if (key == "C_s") p.C_s = parse_double(key, value);
        else if (key == "C_h") p.C_h = parse_double(key, value);
        else if (key == "C_L") p.C_L = parse_double(key, value);
        else if (key == "C_H") p.C_H = parse_double(key, value);
        else if (key == "G") p.G = parse_double(key, value);
        else if (key == "K") p.K = parse_int(key, value);
        else if (key == "gamma") p.gamma = parse_double(key, value);
        else throw std::invalid_argument("unknown parameter key '" + key + "'");
    }
}

std::string to_key_values(const LionParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << "alpha = " << p.alpha << "\n"
       << "beta = " << p.beta << "\n"
       << "lambda = " << p.lambda << "\n"
       << "m = " << p.m << "\n"
       << "M = " << p.M << "\n"
       << "C_s = " << p.C_s << "\n"
       << "C_h = " << p.C_h << "\n"
       << "C_L = " << p.C_L << "\n"
       << "C_H = " << p.C_H << "\n"
       << "G = " << p.G << "\n"
       << "K = " << p.K << "\n"
       << "gamma = " << p.gamma << "\n";
    return os.str();
}

} // namespace lionmdp
