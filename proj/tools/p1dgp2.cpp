// Command-line front end: DOF reports, discrete-Laplacian spectra, 1D
// dispersion sweeps, wave simulations and mesh conversion.

#include "p1dgp2/config.hpp"
#include "p1dgp2/dispersion1d.hpp"
#include "p1dgp2/dynamics.hpp"
#include "p1dgp2/error.hpp"
#include "p1dgp2/mesh_io.hpp"
#include "p1dgp2/spectral.hpp"
#include "p1dgp2/vtk.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace p1dgp2;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kInputError = 1, kNumericalFailure = 2, kInvariantViolation = 3 };

struct Source {
    std::string label;
    Mesh mesh;
};

struct Options {
    std::vector<std::string> meshes;
    std::vector<std::string> generators;
    std::string bc; // empty: neumann, or the config file value for simulate
    int count = 20;
    std::string method = "auto";
    std::string out;
    std::string format = "csv";
    std::string export_dir;
    int samples = 200;
    std::vector<int> consistency;
    std::string config;
    std::optional<double> dt;
    std::optional<double> t_end;
    std::optional<int> stride;
    std::optional<int> snapshot_stride;
    bool force_dt = false;
    bool exploded = false;
};

// "square:n", "cube:n", "interval:n[:length][:periodic]"
Mesh generate(const std::string& spec)
{
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) {
        parts.push_back(p);
    }
    auto number = [&](std::size_t i) {
        try {
            std::size_t used = 0;
            const int n = std::stoi(parts.at(i), &used);
            if (used != parts[i].size() || n < 1) {
                throw std::invalid_argument("");
            }
            return n;
        } catch (const std::exception&) {
            throw ConfigError("bad generator spec `" + spec + "`");
        }
    };
    if (parts.size() == 2 && parts[0] == "square") {
        return generate_square_mesh(number(1));
    }
    if (parts.size() == 2 && parts[0] == "cube") {
        return generate_cube_mesh(number(1));
    }
    if (parts.size() >= 2 && parts.size() <= 4 && parts[0] == "interval") {
        double length = 1.0;
        bool periodic = false;
        for (std::size_t i = 2; i < parts.size(); ++i) {
            if (parts[i] == "periodic") {
                periodic = true;
            } else {
                try {
                    length = std::stod(parts[i]);
                } catch (const std::exception&) {
                    throw ConfigError("bad interval length in `" + spec + "`");
                }
            }
        }
        return generate_interval_mesh(number(1), length, periodic);
    }
    throw ConfigError("unknown generator `" + spec + "` (square:n, cube:n, interval:n[:length][:periodic])");
}

std::vector<Source> load_sources(const Options& o)
{
    std::vector<Source> sources;
    for (const auto& path : o.meshes) {
        sources.push_back({path, load_mesh(path)});
    }
    for (const auto& spec : o.generators) {
        sources.push_back({spec, generate(spec)});
    }
    if (sources.empty()) {
        throw ConfigError("no mesh given (use --mesh or --generate)");
    }
    return sources;
}

BcSpec make_bc(const Mesh& mesh, const std::string& bc)
{
    if (bc.empty()) {
        return BcSpec::all_neumann(mesh);
    }
    if (bc == "dirichlet") {
        return BcSpec::all_dirichlet(mesh);
    }
    if (bc == "neumann") {
        return BcSpec::all_neumann(mesh);
    }
    throw ConfigError("--bc must be dirichlet or neumann");
}

EigenMethod parse_method(const std::string& m)
{
    if (m == "auto") {
        return EigenMethod::Auto;
    }
    if (m == "dense") {
        return EigenMethod::Dense;
    }
    if (m == "iterative") {
        return EigenMethod::Iterative;
    }
    throw ConfigError("--method must be auto, dense or iterative");
}

// Writes to --out when given, otherwise to stdout.
class Output {
public:
    explicit Output(const std::string& path) : path_(path)
    {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) {
                throw ConfigError("cannot write " + path);
            }
        }
    }
    std::ostream& stream() { return path_.empty() ? std::cout : file_; }
    // Human-readable summaries go to stdout only when the data goes to a file.
    std::ostream& summary() { return path_.empty() ? std::cerr : std::cout; }
    bool to_file() const { return !path_.empty(); }

private:
    std::string path_;
    std::ofstream file_;
};

class Manifest {
public:
    Manifest(std::string command, int argc, char** argv) : start_(std::chrono::steady_clock::now())
    {
        data_["command"] = std::move(command);
        data_["argv"] = std::vector<std::string>(argv, argv + argc);
        data_["tool_version"] = P1DGP2_VERSION;
        const std::time_t now = std::time(nullptr);
        std::ostringstream ts;
        ts << std::put_time(std::gmtime(&now), "%FT%TZ");
        data_["started_utc"] = ts.str();
        data_["outputs"] = json::array();
    }
    json& operator[](const char* key) { return data_[key]; }
    void add_output(const std::string& path) { data_["outputs"].push_back(path); }
    void write(const std::filesystem::path& path)
    {
        data_["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        std::ofstream out(path);
        if (!out) {
            throw ConfigError("cannot write " + path.string());
        }
        out << data_.dump(2) << '\n';
    }

private:
    json data_;
    std::chrono::steady_clock::time_point start_;
};

json sources_json(const std::vector<Source>& sources)
{
    json j = json::array();
    for (const auto& s : sources) {
        j.push_back(s.label);
    }
    return j;
}

int cmd_dof_report(const Options& o, Manifest& manifest)
{
    const auto sources = load_sources(o);
    Output out(o.out);
    json rows = json::array();
    if (o.format == "csv") {
        out.stream() << "mesh,dim,cells,vertices,edges,u_per_component,h,ratio\n";
    }
    for (const auto& s : sources) {
        const DofCounts c = count_dofs(s.mesh);
        if (o.format == "csv") {
            out.stream() << s.label << ',' << s.mesh.dim() << ',' << c.cells << ',' << c.vertices << ',' << c.edges
                         << ',' << c.u_per_component << ',' << c.h << ',' << std::setprecision(6) << c.ratio()
                         << '\n';
        }
        rows.push_back({{"mesh", s.label},
                        {"dim", s.mesh.dim()},
                        {"cells", c.cells},
                        {"vertices", c.vertices},
                        {"edges", c.edges},
                        {"u_per_component", c.u_per_component},
                        {"h", c.h},
                        {"ratio", c.ratio()}});
    }
    if (o.format == "json") {
        out.stream() << json{{"meshes", rows}}.dump(2) << '\n';
    }
    manifest["inputs"] = sources_json(sources);
    if (out.to_file()) {
        manifest.add_output(o.out);
        manifest.write(o.out + ".manifest.json");
    }
    return kOk;
}

int cmd_spectrum(const Options& o, Manifest& manifest)
{
    const auto sources = load_sources(o);
    SpectrumOptions so;
    so.count = o.count;
    so.method = parse_method(o.method);
    if (so.count < 1) {
        throw ConfigError("--count must be at least 1");
    }
    Output out(o.out);
    std::vector<Spectrum> spectra;
    std::vector<std::string> labels;
    json meshes = json::array();
    for (std::size_t k = 0; k < sources.size(); ++k) {
        const Source& src = sources[k];
        const DofMap dofs(src.mesh);
        const AssembledOperators ops = assemble(src.mesh, dofs, make_bc(src.mesh, o.bc));
        SpectrumOptions mo = so;
        mo.count = std::min(so.count, ops.m_h);
        const bool dense = mo.method == EigenMethod::Dense ||
                           (mo.method == EigenMethod::Auto && ops.m_h < mo.dense_threshold);
        if (!dense && 2 * mo.count >= ops.m_h) {
            mo.method = EigenMethod::Dense;
        }
        Spectrum s = laplacian_spectrum(ops, mo);
        const int nulls = null_space_dimension(s);
        const auto first = smallest_nonzero_eigenvalue(s);
        meshes.push_back({{"mesh", src.label},
                          {"dim", src.mesh.dim()},
                          {"cells", src.mesh.n_cells()},
                          {"m_u", ops.m_u},
                          {"m_h", ops.m_h},
                          {"solver", dense ? "dense" : "iterative"},
                          {"eigenvalues", std::vector<double>(s.eigenvalues.data(),
                                                              s.eigenvalues.data() + s.eigenvalues.size())},
                          {"lambda_max", s.lambda_max},
                          {"null_tolerance", s.null_tolerance},
                          {"null_space_dimension", nulls},
                          {"smallest_nonzero", first ? json(*first) : json(nullptr)}});
        out.summary() << src.label << ": m_h = " << ops.m_h << ", null space " << nulls
                      << ", smallest nonzero " << (first ? std::to_string(*first) : std::string("-"))
                      << ", lambda_max " << s.lambda_max << '\n';
        if (!o.export_dir.empty()) {
            const std::filesystem::path dir = sources.size() == 1
                                                  ? std::filesystem::path(o.export_dir)
                                                  : std::filesystem::path(o.export_dir) / std::to_string(k);
            std::filesystem::create_directories(dir);
            write_matrix_market(dir / "M_h.mtx", ops.mass_h);
            write_matrix_market(dir / "M_u.mtx", ops.mass_u.to_sparse());
            write_matrix_market(dir / "A.mtx", laplacian_operator(ops));
            for (int i = 0; i < ops.dim; ++i) {
                write_matrix_market(dir / ("C_" + std::to_string(i) + ".mtx"),
                                    ops.gradient[static_cast<std::size_t>(i)]);
            }
            manifest.add_output(dir.string());
        }
        spectra.push_back(std::move(s));
        labels.push_back(src.label);
    }
    const SpuriousReport report = spurious_mode_report(spectra, labels);
    json levels = json::array();
    for (const auto& l : report.levels) {
        levels.push_back({{"mesh", l.label},
                          {"null_count", l.null_count},
                          {"smallest_nonzero", l.smallest_nonzero ? json(*l.smallest_nonzero) : json(nullptr)},
                          {"flagged", l.flagged}});
        if (!l.flagged.empty()) {
            out.summary() << l.label << ": " << l.flagged.size()
                          << " eigenvalue(s) dropped by more than 2x under refinement\n";
        }
    }

    if (o.format == "json") {
        out.stream() << json{{"bc", o.bc.empty() ? "neumann" : o.bc}, {"meshes", meshes}, {"refinement", levels},
                             {"any_flagged", report.any_flagged()}}
                            .dump(2)
                     << '\n';
    } else {
        const bool many = spectra.size() > 1;
        out.stream() << (many ? "mesh,index,eigenvalue\n" : "index,eigenvalue\n") << std::setprecision(17);
        for (std::size_t k = 0; k < spectra.size(); ++k) {
            for (int i = 0; i < spectra[k].eigenvalues.size(); ++i) {
                if (many) {
                    out.stream() << labels[k] << ',';
                }
                out.stream() << i << ',' << spectra[k].eigenvalues(i) << '\n';
            }
        }
    }
    manifest["inputs"] = sources_json(sources);
    manifest["bc"] = o.bc.empty() ? "neumann" : o.bc;
    manifest["tolerances"] = {{"null_tolerance", so.null_tolerance}, {"residual", so.residual_tolerance}};
    if (out.to_file()) {
        manifest.add_output(o.out);
        manifest.write(o.out + ".manifest.json");
    }
    return kOk;
}

int cmd_dispersion(const Options& o, Manifest& manifest)
{
    const DispersionSweep sweep = dispersion_sweep(o.samples);
    Output out(o.out);
    json checks = json::array();
    bool consistent = true;
    for (int n : o.consistency) {
        const ConsistencyReport r = semidiscrete_consistency_check(n);
        consistent = consistent && r.passed();
        checks.push_back({{"elements", n},
                          {"max_frequency_error", r.max_frequency_error},
                          {"worst_m", r.worst_m},
                          {"max_eigen_residual", r.max_eigen_residual},
                          {"full_spectrum_error", r.full_spectrum_error},
                          {"stencil_error", r.stencil_error},
                          {"passed", r.passed()}});
        out.summary() << "assembly consistency, I = " << n << ": max frequency error " << r.max_frequency_error
                      << (r.passed() ? " (pass)" : " (FAIL at m = " + std::to_string(r.worst_m) + ")") << '\n';
    }
    if (o.format == "json") {
        json samples = json::array();
        for (const auto& s : sweep.samples) {
            samples.push_back({{"phi", s.phi},
                               {"w_lower", s.w_lower},
                               {"w_upper", s.w_upper},
                               {"disc_lower", s.disc_lower},
                               {"disc_upper", s.disc_upper}});
        }
        out.stream() << json{{"samples", samples},
                             {"max_w_lower", sweep.max_lower},
                             {"min_w_upper", sweep.min_upper},
                             {"gap", sweep.gap()},
                             {"lower_branch_monotone_checked", sweep.monotone_checked},
                             {"consistency", checks}}
                            .dump(2)
                     << '\n';
    } else {
        write_dispersion_csv(out.stream(), sweep);
    }
    out.summary() << std::setprecision(10) << "max w_lower " << sweep.max_lower << ", min w_upper "
                  << sweep.min_upper << ", gap " << sweep.gap() << '\n';
    manifest["samples"] = o.samples;
    manifest["consistency_elements"] = o.consistency;
    if (out.to_file()) {
        manifest.add_output(o.out);
        manifest.write(o.out + ".manifest.json");
    }
    return consistent ? kOk : kInvariantViolation;
}

int cmd_simulate(const Options& o, Manifest& manifest)
{
    if (o.out.empty()) {
        throw ConfigError("simulate needs --out DIR");
    }
    SimulationSettings settings;
    if (!o.config.empty()) {
        settings = simulation_settings(KeyValueConfig::read(o.config));
    }
    if (o.dt) {
        settings.dt = *o.dt;
    }
    if (o.t_end) {
        settings.t_end = *o.t_end;
    }
    if (o.stride) {
        settings.stride = *o.stride;
    }
    if (o.snapshot_stride) {
        settings.snapshot_stride = *o.snapshot_stride;
    }
    if (o.force_dt) {
        settings.force_dt = true;
    }
    if (!(settings.dt > 0.0) || settings.stride < 1 || settings.snapshot_stride < 0) {
        throw ConfigError("need dt > 0, stride >= 1, snapshot stride >= 0");
    }
    const auto sources = load_sources(o);
    if (sources.size() != 1) {
        throw ConfigError("simulate takes exactly one mesh");
    }
    const Mesh& mesh = sources[0].mesh;
    const std::string bc = o.bc.empty() ? settings.bc : o.bc;
    const DofMap dofs(mesh);
    const AssembledOperators ops = assemble(mesh, dofs, make_bc(mesh, bc));
    const FieldState initial = interpolate_initial_state(mesh, dofs, make_initial_condition(settings, mesh.dim()));

    SimulationConfig cfg;
    cfg.dt = settings.dt;
    cfg.n_steps = settings.steps();
    cfg.energy_stride = settings.stride;
    cfg.snapshot_stride = settings.snapshot_stride;
    cfg.wave_speed = settings.c;
    cfg.force_dt = settings.force_dt;

    const std::filesystem::path dir(o.out);
    std::filesystem::create_directories(dir);
    auto snapshot = [&](const FieldState& s, int step) {
        std::ostringstream name;
        name << "snapshot_" << std::setw(7) << std::setfill('0') << step;
        write_vtk(dir / (name.str() + ".vtk"), mesh, dofs, s);
        manifest.add_output((dir / (name.str() + ".vtk")).string());
        if (o.exploded) {
            write_vtk_exploded(dir / (name.str() + "_exploded.vtk"), mesh, dofs, s);
            manifest.add_output((dir / (name.str() + "_exploded.vtk")).string());
        }
    };
    const SimulationResult result = simulate(ops, initial, cfg, snapshot);

    {
        std::ofstream csv(dir / "energy.csv");
        csv << "time,energy,energy_error\n" << std::setprecision(17);
        for (const auto& e : result.energy) {
            csv << e.time << ',' << e.energy << ',' << e.energy_error << '\n';
        }
    }
    manifest.add_output((dir / "energy.csv").string());
    write_vtk(dir / "final.vtk", mesh, dofs, result.final_state);
    manifest.add_output((dir / "final.vtk").string());
    if (o.exploded) {
        write_vtk_exploded(dir / "final_exploded.vtk", mesh, dofs, result.final_state);
        manifest.add_output((dir / "final_exploded.vtk").string());
    }

    manifest["inputs"] = sources_json(sources);
    manifest["bc"] = bc;
    manifest["settings"] = {{"dt", cfg.dt},          {"n_steps", cfg.n_steps}, {"stride", cfg.energy_stride},
                            {"snapshot_stride", cfg.snapshot_stride}, {"c", cfg.wave_speed},
                            {"ic", settings.ic},     {"width", settings.width}, {"force_dt", cfg.force_dt}};
    manifest["stable_dt"] = result.stable_dt;
    manifest["completed"] = result.completed;
    manifest["max_abs_energy_error"] = result.max_abs_energy_error();
    if (!result.completed) {
        manifest["failure"] = result.failure;
    }
    manifest.write(dir / "manifest.json");

    std::cout << "final time " << result.final_state.time << ", steps " << result.steps_taken << ", max |energy error| "
              << result.max_abs_energy_error();
    if (result.stable_dt > 0.0) {
        std::cout << ", stable dt " << result.stable_dt;
    }
    std::cout << '\n';
    if (!result.completed) {
        std::cerr << "error: " << result.failure << '\n';
        return kNumericalFailure;
    }
    return kOk;
}

int cmd_mesh_convert(const Options& o, Manifest& manifest)
{
    if (o.out.empty()) {
        throw ConfigError("mesh-convert needs --out STEM");
    }
    const auto sources = load_sources(o);
    if (sources.size() != 1) {
        throw ConfigError("mesh-convert takes exactly one mesh");
    }
    const Mesh& mesh = sources[0].mesh;
    if (mesh.dim() == 2) {
        write_triangle_mesh(mesh, o.out);
    } else if (mesh.dim() == 3) {
        write_tetgen_mesh(mesh, o.out);
    } else {
        throw ConfigError("only 2D (Triangle) and 3D (TetGen) meshes can be written");
    }
    std::cout << "wrote " << o.out << ".node/.ele" << (mesh.dim() == 2 ? "/.edge" : "/.face") << " ("
              << mesh.n_cells() << " cells)\n";
    manifest["inputs"] = sources_json(sources);
    manifest.add_output(o.out);
    manifest.write(o.out + ".manifest.json");
    return kOk;
}

void add_mesh_options(CLI::App* cmd, Options& o, bool many)
{
    auto* mesh = cmd->add_option("--mesh", o.meshes, "Triangle/TetGen mesh (stem or any of its files)");
    auto* gen = cmd->add_option("--generate", o.generators, "square:n | cube:n | interval:n[:length][:periodic]");
    if (!many) {
        mesh->expected(0, 1);
        gen->expected(0, 1);
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mixed P1DG-P2 finite elements for the first-order wave equation"};
    app.set_version_flag("--version", std::string(P1DGP2_VERSION));
    app.require_subcommand(1);
    Options o;

    auto* dof = app.add_subcommand("dof-report", "Count cells, vertices, edges and velocity/height DOFs");
    add_mesh_options(dof, o, true);
    dof->add_option("--out", o.out, "Output file (default stdout)");
    dof->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));

    auto* spec = app.add_subcommand("spectrum", "Lowest eigenvalues of the discrete Laplacian");
    add_mesh_options(spec, o, true);
    spec->add_option("--bc", o.bc, "Boundary condition for h")->check(CLI::IsMember({"dirichlet", "neumann"}));
    spec->add_option("--count", o.count, "Number of eigenvalues");
    spec->add_option("--method", o.method)->check(CLI::IsMember({"auto", "dense", "iterative"}));
    spec->add_option("--out", o.out, "Output file (default stdout)");
    spec->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));
    spec->add_option("--export-matrices", o.export_dir, "Write M_h, M_u, C_i and A in Matrix Market format");

    auto* disp = app.add_subcommand("dispersion", "1D dispersion relation and mode discontinuities");
    disp->add_option("--samples", o.samples, "Number of phi samples in (0, pi]");
    disp->add_option("--consistency", o.consistency, "Check the assembled periodic system with I elements");
    disp->add_option("--out", o.out, "Output file (default stdout)");
    disp->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));

    auto* sim = app.add_subcommand("simulate", "Stormer-Verlet wave simulation");
    add_mesh_options(sim, o, false);
    sim->add_option("--config", o.config, "key = value settings file");
    sim->add_option("--bc", o.bc, "Boundary condition for h")->check(CLI::IsMember({"dirichlet", "neumann"}));
    sim->add_option("--dt", o.dt, "Time step");
    sim->add_option("--t-end", o.t_end, "Final time");
    sim->add_option("--stride", o.stride, "Energy sampling stride");
    sim->add_option("--snapshot-stride", o.snapshot_stride, "VTK snapshot stride (0 = final state only)");
    sim->add_flag("--force-dt", o.force_dt, "Run even if dt exceeds the stability estimate");
    sim->add_flag("--exploded", o.exploded, "Also write exploded-mesh VTK files with the discontinuous velocity");
    sim->add_option("--out", o.out, "Output directory")->required();

    auto* conv = app.add_subcommand("mesh-convert", "Write a mesh in Triangle (2D) or TetGen (3D) format");
    add_mesh_options(conv, o, false);
    conv->add_option("--out", o.out, "Output stem")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        CLI::App* cmd = app.get_subcommands().front();
        Manifest manifest(cmd->get_name(), argc, argv);
        if (cmd == dof) {
            return cmd_dof_report(o, manifest);
        }
        if (cmd == spec) {
            return cmd_spectrum(o, manifest);
        }
        if (cmd == disp) {
            return cmd_dispersion(o, manifest);
        }
        if (cmd == sim) {
            return cmd_simulate(o, manifest);
        }
        return cmd_mesh_convert(o, manifest);
    } catch (const InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return kInvariantViolation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const std::exception& e) {
        // ParseError, ConfigError, ContractError, DomainError, I/O failures
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    }
}
