#include "urn/text.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace urn
{
namespace
{
std::string_view trim(std::string_view s)
{
    auto const first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    auto const last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, char const* what)
{
    throw std::invalid_argument("invalid value '" + std::string(value) + "' for '"
                                + std::string(key) + "': expected " + what);
}

std::vector<std::string_view> split_list(std::string_view value)
{
    std::vector<std::string_view> items;
    while (!value.empty())
    {
        auto const comma = value.find(',');
        items.push_back(trim(value.substr(0, comma)));
        if (comma == std::string_view::npos)
            break;
        value.remove_prefix(comma + 1);
    }
    return items;
}
}  // namespace

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text)
{
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t line_no = 0;
    while (!text.empty())
    {
        ++line_no;
        auto const nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (auto const hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty() || line.front() == '[')
            continue;
        auto const eq = line.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key.empty())
            throw std::invalid_argument("line " + std::to_string(line_no) + ": empty key");
        out.emplace_back(std::string(key), std::string(value));
    }
    return out;
}

double parse_double(std::string_view key, std::string_view value)
{
    value = trim(value);
    // from_chars for double rejects a leading '+', so strip it.
    if (!value.empty() && value.front() == '+')
        value.remove_prefix(1);
    double x = 0;
    auto const [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(x))
        bad_value(key, value, "a finite real number");
    return x;
}

std::int64_t parse_int(std::string_view key, std::string_view value)
{
    value = trim(value);
    std::int64_t x = 0;
    auto const [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec == std::errc{} && ptr == value.data() + value.size())
        return x;
    // Accept integral values written in scientific notation ("1e7").
    double const d = parse_double(key, value);
    if (d != std::floor(d) || std::abs(d) > 9.0e18)
        bad_value(key, value, "an integer");
    return static_cast<std::int64_t>(d);
}

bool parse_bool(std::string_view key, std::string_view value)
{
    value = trim(value);
    if (value == "true" || value == "1" || value == "yes")
        return true;
    if (value == "false" || value == "0" || value == "no")
        return false;
    bad_value(key, value, "true or false");
}

std::vector<int> parse_int_list(std::string_view key, std::string_view value)
{
    std::vector<int> out;
    for (auto item : split_list(value))
        out.push_back(static_cast<int>(parse_int(key, item)));
    if (out.empty())
        bad_value(key, value, "a nonempty list");
    return out;
}

std::vector<double> parse_double_list(std::string_view key, std::string_view value)
{
    std::vector<double> out;
    for (auto item : split_list(value))
        out.push_back(parse_double(key, item));
    if (out.empty())
        bad_value(key, value, "a nonempty list");
    return out;
}

std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto const [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

std::string read_file(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace urn
