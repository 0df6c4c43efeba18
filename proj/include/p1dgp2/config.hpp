#pragma once

#include "p1dgp2/dynamics.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace p1dgp2 {

// Flat `key = value` text; `#` starts a comment, blank lines are ignored.
// Duplicate keys and lines without `=` are ParseErrors (file and line).
class KeyValueConfig {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static KeyValueConfig parse(std::istream& in, const std::string& name);
    static KeyValueConfig read(const std::filesystem::path& path);

    bool has(const std::string& key) const { return entries_.contains(key); }
    const std::string& name() const noexcept { return name_; }
    const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

    // Typed accessors; a malformed value is a ParseError at its line.
    std::optional<std::string> text(const std::string& key) const;
    std::optional<double> real(const std::string& key) const;
    std::optional<int> integer(const std::string& key) const;
    std::optional<bool> boolean(const std::string& key) const;
    std::optional<std::vector<double>> reals(const std::string& key) const;   // comma or space separated

    // Throws ParseError naming the first key not in `known`.
    void require_known(const std::vector<std::string>& known) const;

private:
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

    std::string name_;
    std::map<std::string, Entry> entries_;
};

// Settings of a simulation run. Keys: dt, t_end, n_steps, stride,
// snapshot_stride, bc (dirichlet|neumann), ic (gaussian|cosine|sine), center,
// width, amplitude, modes, c, force_dt.
struct SimulationSettings {
    double dt = 0.001;
    std::optional<double> t_end;
    std::optional<int> n_steps;
    int stride = 1;
    int snapshot_stride = 0;
    std::string bc = "neumann";
    std::string ic = "gaussian";
    std::vector<double> center;   // empty => domain centre
    double width = 0.1;
    double amplitude = 1.0;
    std::vector<int> modes;       // empty => 1 in every direction
    double c = 1.0;
    bool force_dt = false;

    int steps() const;            // from n_steps or t_end (t_end wins); ConfigError if neither
};

SimulationSettings simulation_settings(const KeyValueConfig& config);

// Resolves the initial-condition preset for a mesh of dimension `dim` on the unit box.
InitialCondition make_initial_condition(const SimulationSettings& settings, int dim);

} // namespace p1dgp2
