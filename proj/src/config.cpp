#include "p1dgp2/config.hpp"

#include "p1dgp2/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace p1dgp2 {

namespace {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

template <class T>
bool parse_number(const std::string& text, T& value)
{
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    return ec == std::errc() && ptr == end;
}

} // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& name)
{
    KeyValueConfig config;
    config.name_ = name;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string body = trim(std::string_view(line).substr(0, line.find('#')));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ParseError(name, number, "expected `key = value`");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) {
            throw ParseError(name, number, "empty key");
        }
        if (value.empty()) {
            throw ParseError(name, number, "empty value for `" + key + "`");
        }
        if (!config.entries_.emplace(key, Entry{value, number}).second) {
            throw ParseError(name, number, "duplicate key `" + key + "`");
        }
    }
    return config;
}

KeyValueConfig KeyValueConfig::read(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    return parse(in, path.string());
}

void KeyValueConfig::fail(const std::string& key, const std::string& what) const
{
    const auto it = entries_.find(key);
    throw ParseError(name_, it == entries_.end() ? 0 : it->second.line, what);
}

std::optional<std::string> KeyValueConfig::text(const std::string& key) const
{
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second.value;
}

std::optional<double> KeyValueConfig::real(const std::string& key) const
{
    const auto t = text(key);
    if (!t) {
        return std::nullopt;
    }
    double v = 0.0;
    if (!parse_number(*t, v)) {
        fail(key, "`" + key + "` is not a number: " + *t);
    }
    return v;
}

std::optional<int> KeyValueConfig::integer(const std::string& key) const
{
    const auto t = text(key);
    if (!t) {
        return std::nullopt;
    }
    int v = 0;
    if (!parse_number(*t, v)) {
        fail(key, "`" + key + "` is not an integer: " + *t);
    }
    return v;
}

std::optional<bool> KeyValueConfig::boolean(const std::string& key) const
{
    auto t = text(key);
    if (!t) {
        return std::nullopt;
    }
    std::ranges::transform(*t, t->begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (*t == "true" || *t == "yes" || *t == "1") {
        return true;
    }
    if (*t == "false" || *t == "no" || *t == "0") {
        return false;
    }
    fail(key, "`" + key + "` is not a boolean: " + *t);
}

std::optional<std::vector<double>> KeyValueConfig::reals(const std::string& key) const
{
    auto t = text(key);
    if (!t) {
        return std::nullopt;
    }
    std::ranges::replace(*t, ',', ' ');
    std::istringstream in(*t);
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        double v = 0.0;
        if (!parse_number(token, v)) {
            fail(key, "`" + key + "` is not a list of numbers: " + *text(key));
        }
        values.push_back(v);
    }
    return values;
}

void KeyValueConfig::require_known(const std::vector<std::string>& known) const
{
    for (const auto& [key, entry] : entries_) {
        if (std::ranges::find(known, key) == known.end()) {
            throw ParseError(name_, entry.line, "unknown key `" + key + "`");
        }
    }
}

int SimulationSettings::steps() const
{
    if (t_end) {
        return steps_for(*t_end, dt);
    }
    if (n_steps) {
        return *n_steps;
    }
    throw ConfigError("simulation needs t_end or n_steps");
}

SimulationSettings simulation_settings(const KeyValueConfig& config)
{
    config.require_known({"dt", "t_end", "n_steps", "stride", "snapshot_stride", "bc", "ic", "center", "width",
                          "amplitude", "modes", "c", "force_dt"});
    SimulationSettings s;
    auto check = [&](bool ok, const std::string& key, const std::string& what) {
        if (!ok) {
            const auto it = config.entries().find(key);
            throw ParseError(config.name(), it == config.entries().end() ? 0 : it->second.line, what);
        }
    };
    s.dt = config.real("dt").value_or(s.dt);
    check(s.dt > 0.0, "dt", "dt must be positive");
    s.t_end = config.real("t_end");
    check(!s.t_end || *s.t_end >= 0.0, "t_end", "t_end must be non-negative");
    s.n_steps = config.integer("n_steps");
    check(!s.n_steps || *s.n_steps >= 0, "n_steps", "n_steps must be non-negative");
    s.stride = config.integer("stride").value_or(s.stride);
    check(s.stride >= 1, "stride", "stride must be at least 1");
    s.snapshot_stride = config.integer("snapshot_stride").value_or(s.snapshot_stride);
    check(s.snapshot_stride >= 0, "snapshot_stride", "snapshot_stride must be non-negative");
    s.bc = config.text("bc").value_or(s.bc);
    check(s.bc == "dirichlet" || s.bc == "neumann", "bc", "bc must be dirichlet or neumann");
    s.ic = config.text("ic").value_or(s.ic);
    check(s.ic == "gaussian" || s.ic == "cosine" || s.ic == "sine", "ic", "ic must be gaussian, cosine or sine");
    s.center = config.reals("center").value_or(s.center);
    check(s.center.size() <= 3, "center", "center has at most 3 coordinates");
    s.width = config.real("width").value_or(s.width);
    check(s.width > 0.0, "width", "width must be positive");
    s.amplitude = config.real("amplitude").value_or(s.amplitude);
    if (const auto modes = config.reals("modes")) {
        for (double m : *modes) {
            check(m == std::floor(m) && m >= 0.0, "modes", "modes must be non-negative integers");
            s.modes.push_back(static_cast<int>(m));
        }
        check(!s.modes.empty() && s.modes.size() <= 3, "modes", "modes needs 1 to 3 entries");
    }
    s.c = config.real("c").value_or(s.c);
    check(s.c > 0.0, "c", "c must be positive");
    s.force_dt = config.boolean("force_dt").value_or(s.force_dt);
    return s;
}

InitialCondition make_initial_condition(const SimulationSettings& settings, int dim)
{
    if (settings.ic == "gaussian") {
        Point center{0.0, 0.0, 0.0};
        for (int k = 0; k < dim; ++k) {
            center[static_cast<std::size_t>(k)] = 0.5;
        }
        if (!settings.center.empty()) {
            if (static_cast<int>(settings.center.size()) != dim) {
                throw ConfigError("center needs " + std::to_string(dim) + " coordinates");
            }
            std::ranges::copy(settings.center, center.begin());
        }
        return gaussian_bump(center, settings.width, settings.amplitude);
    }
    std::vector<int> modes = settings.modes;
    if (modes.empty()) {
        modes.assign(static_cast<std::size_t>(dim), 1);
    }
    if (static_cast<int>(modes.size()) != dim) {
        throw ConfigError("modes needs " + std::to_string(dim) + " entries");
    }
    return standing_wave(modes, settings.ic == "sine", settings.amplitude);
}

} // namespace p1dgp2
