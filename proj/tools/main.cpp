// Command line entry point: wires JSON configs and flags to the density,
// graph, spectral, continuum and sweep modules.
//
// Exit codes: 0 success, 1 domain/config error, 2 numerical non-convergence,
// 3 IO error. Diagnostics go to stderr; machine output goes to files or
// stdout only.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pqrlab/continuum.hpp"
#include "pqrlab/density.hpp"
#include "pqrlab/graph.hpp"
#include "pqrlab/mmio.hpp"
#include "pqrlab/spectral.hpp"
#include "pqrlab/sweep.hpp"

namespace fs = std::filesystem;
using namespace pqrlab;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string output_dir = ".";
    int verbosity = 0;
};

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
}

std::ofstream open_output(const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw IoError("cannot open output file: " + p.string());
    return out;
}

struct DensityOpts {
    std::string variant = "erf";
    double epsilon = 0.025;
    double omega = 0.25;
    std::string geometry = "paper-2";
};

DensityModel build_density(const CommonOpts& common, const DensityOpts& opts,
                           const CLI::App* cmd) {
    // precedence: flags > config file > defaults
    if (!common.config_path.empty()) {
        auto j = load_json(common.config_path);
        if (j.contains("density")) j = j["density"];
        if (cmd->count("--density")) j["variant"] = opts.variant;
        if (cmd->count("--epsilon")) j["epsilon"] = opts.epsilon;
        if (cmd->count("--omega")) j["omega"] = opts.omega;
        if (cmd->count("--geometry")) {
            auto arr = nlohmann::json::array();
            for (const auto& c : paper_geometry(opts.geometry))
                arr.push_back({{"center", c.center}, {"radius", c.radius}});
            j["clusters"] = arr;
        }
        return DensityModel::from_json(j);
    }
    const auto variant = density_variant_from_string(opts.variant);
    switch (variant) {
        case DensityVariant::ErfClusters:
            return DensityModel::erf_clusters(DomainBox::centered_square(), opts.epsilon,
                                              paper_geometry(opts.geometry));
        case DensityVariant::MollifiedIndicator:
            return DensityModel::mollified_indicator(DomainBox::centered_square(), opts.epsilon,
                                                     paper_geometry(opts.geometry));
        case DensityVariant::PiecewiseConstant:
            return DensityModel::piecewise_constant(opts.epsilon);
        case DensityVariant::ExpMixture:
            return DensityModel::exp_mixture(opts.omega);
    }
    throw ConfigError("unreachable density variant");
}

void add_density_flags(CLI::App* cmd, DensityOpts& d) {
    cmd->add_option("--density", d.variant, "density variant: erf, piecewise, expmix, mollified");
    cmd->add_option("--epsilon", d.epsilon, "perturbation scale epsilon");
    cmd->add_option("--omega", d.omega, "overlap scale omega (exp mixture)");
    cmd->add_option("--geometry", d.geometry, "cluster preset: paper-2, paper-3, paper-5");
}

void add_common_flags(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--config", c.config_path, "JSON config file");
    cmd->add_option("--output-dir", c.output_dir, "output directory");
    cmd->add_flag_function(
        "-v,--verbose", [&c](std::int64_t n) { c.verbosity = static_cast<int>(n); },
        "increase verbosity (up to -vvv)");
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

int run_app(int argc, char** argv) {
    CLI::App app{"numerical laboratory for the (p,q,r) family of graph Laplacians "
                 "and their continuum limits"};
    app.require_subcommand(1);

    // ---------------------------------------------------------------- sample
    auto* sample_cmd = app.add_subcommand("sample", "draw a point cloud from a density");
    CommonOpts sample_common;
    DensityOpts sample_density;
    int sample_n = 1024;
    std::uint64_t sample_seed = 42;
    add_common_flags(sample_cmd, sample_common);
    add_density_flags(sample_cmd, sample_density);
    sample_cmd->add_option("-n,--n-vertices", sample_n, "number of samples");
    sample_cmd->add_option("--seed", sample_seed, "RNG seed");
    sample_cmd->callback([&] {
        const auto model = build_density(sample_common, sample_density, sample_cmd);
        const auto report = model.validate_assumptions();
        if (!report.all_ok() && sample_common.verbosity > 0)
            for (const auto& note : report.notes) std::cerr << "note: " << note << "\n";
        const auto batch = model.sample(sample_n, sample_seed);
        ensure_dir(sample_common.output_dir);
        auto out = open_output(fs::path(sample_common.output_dir) / "samples.csv");
        batch.write_csv(out);
        std::cerr << "wrote " << batch.n << " samples from " << model.id() << " to "
                  << sample_common.output_dir << "/samples.csv\n";
    });

    // ----------------------------------------------------------------- graph
    auto* graph_cmd = app.add_subcommand("graph", "build the q-reweighted proximity graph");
    CommonOpts graph_common;
    DensityOpts graph_density;
    int graph_n = 1024;
    std::uint64_t graph_seed = 42;
    double graph_q = 2.0;
    double graph_delta = 0.0;
    std::string graph_profile = "indicator";
    add_common_flags(graph_cmd, graph_common);
    add_density_flags(graph_cmd, graph_density);
    graph_cmd->add_option("-n,--n-vertices", graph_n, "number of samples");
    graph_cmd->add_option("--seed", graph_seed, "RNG seed");
    graph_cmd->add_option("-q", graph_q, "reweighting exponent q");
    graph_cmd->add_option("--delta", graph_delta, "kernel bandwidth (default: (log n / n)^{1/3})");
    graph_cmd->add_option("--profile", graph_profile, "kernel profile");
    graph_cmd->callback([&] {
        const auto model = build_density(graph_common, graph_density, graph_cmd);
        const auto batch = model.sample(graph_n, graph_seed);
        const double delta = graph_cmd->count("--delta") ? graph_delta : delta_rule(graph_n);
        const KernelSpec kernel(kernel_profile_from_string(graph_profile), delta, batch.dim);
        const auto raw = build_raw_graph(batch, kernel);
        const auto graph = reweight(raw, graph_q);
        ensure_dir(graph_common.output_dir);
        {
            auto out = open_output(fs::path(graph_common.output_dir) / "raw_weights.mtx");
            write_matrix_market(out, graph.raw_weights);
        }
        {
            auto out = open_output(fs::path(graph_common.output_dir) / "weights.mtx");
            write_matrix_market(out, graph.weights);
        }
        std::cerr << "graph on " << graph.n << " vertices, " << graph.weights.stored()
                  << " stored edges, delta=" << delta << "\n";
    });

    // -------------------------------------------------------------- spectrum
    auto* spec_cmd = app.add_subcommand("spectrum", "low-lying spectrum of the graph Laplacian");
    CommonOpts spec_common;
    DensityOpts spec_density;
    int spec_n = 1024, spec_k = 6;
    std::uint64_t spec_seed = 42;
    double spec_p = 1.0, spec_q = 2.0, spec_r = 0.0, spec_tol = 1e-8;
    bool spec_scale = false, spec_export = false;
    std::string spec_profile = "indicator";
    add_common_flags(spec_cmd, spec_common);
    add_density_flags(spec_cmd, spec_density);
    spec_cmd->add_option("-n,--n-vertices", spec_n, "number of samples");
    spec_cmd->add_option("--seed", spec_seed, "RNG seed");
    spec_cmd->add_option("-p", spec_p, "exponent p");
    spec_cmd->add_option("-q", spec_q, "exponent q");
    spec_cmd->add_option("-r", spec_r, "exponent r");
    spec_cmd->add_option("-k,--k-eigen", spec_k, "number of eigenpairs");
    spec_cmd->add_option("--tol", spec_tol, "solver tolerance");
    spec_cmd->add_option("--profile", spec_profile, "kernel profile");
    spec_cmd->add_flag("--scale", spec_scale, "apply the discrete-to-continuum scaling");
    spec_cmd->add_flag("--export-matrices", spec_export, "write the Laplacian in MatrixMarket form");
    spec_cmd->callback([&] {
        const auto model = build_density(spec_common, spec_density, spec_cmd);
        const auto batch = model.sample(spec_n, spec_seed);
        const double delta = delta_rule(spec_n);
        const KernelSpec kernel(kernel_profile_from_string(spec_profile), delta, batch.dim);
        const auto graph = reweight(build_raw_graph(batch, kernel), spec_q);
        const PQRParams params{spec_p, spec_q, spec_r};
        const auto system = assemble(graph, params);
        auto spectrum = solve_lowest(system, spec_k, spec_tol);
        if (spec_scale)
            spectrum = spectrum.scaled(continuum_scale(params, kernel, spec_n, delta));
        ensure_dir(spec_common.output_dir);
        {
            auto out = open_output(fs::path(spec_common.output_dir) / "spectrum.json");
            out << spectrum.to_json().dump(2) << "\n";
        }
        {
            auto out = open_output(fs::path(spec_common.output_dir) / "spectrum.csv");
            spectrum.write_csv(out);
        }
        if (spec_export) {
            auto out = open_output(fs::path(spec_common.output_dir) / "laplacian.mtx");
            write_matrix_market(out, system.A);
        }
        std::cerr << "spectrum of " << model.id() << " with (p,q,r)=(" << spec_p << "," << spec_q
                  << "," << spec_r << ") written to " << spec_common.output_dir << "\n";
    });

    // ------------------------------------------------------------- continuum
    auto* cont_cmd = app.add_subcommand("continuum", "finite element reference spectrum");
    CommonOpts cont_common;
    DensityOpts cont_density;
    int cont_cells = 200, cont_k = 6;
    double cont_p = 1.0, cont_q = 2.0, cont_r = 0.0, cont_tol = 1e-8;
    bool cont_eigenfunctions = false, cont_export = false;
    add_common_flags(cont_cmd, cont_common);
    add_density_flags(cont_cmd, cont_density);
    cont_cmd->add_option("--n-cells", cont_cells, "mesh cells per axis");
    cont_cmd->add_option("-p", cont_p, "exponent p");
    cont_cmd->add_option("-q", cont_q, "exponent q");
    cont_cmd->add_option("-r", cont_r, "exponent r");
    cont_cmd->add_option("-k,--k-eigen", cont_k, "number of eigenpairs");
    cont_cmd->add_option("--tol", cont_tol, "solver tolerance");
    cont_cmd->add_flag("--export-eigenfunctions", cont_eigenfunctions,
                       "write one CSV (node_x, node_y, v, u) per eigenpair");
    cont_cmd->add_flag("--export-matrices", cont_export, "write stiffness/mass in MatrixMarket form");
    cont_cmd->callback([&] {
        const auto model = build_density(cont_common, cont_density, cont_cmd);
        const StructuredMesh mesh(model.domain(), cont_cells);
        const PQRParams params{cont_p, cont_q, cont_r};
        const auto system = assemble_continuum(mesh, model, params);
        const auto spectrum = solve_continuum(system, cont_k, cont_tol);
        ensure_dir(cont_common.output_dir);
        {
            auto out = open_output(fs::path(cont_common.output_dir) / "spectrum.json");
            out << spectrum.to_json().dump(2) << "\n";
        }
        {
            auto out = open_output(fs::path(cont_common.output_dir) / "spectrum.csv");
            spectrum.write_csv(out);
        }
        if (cont_eigenfunctions)
            for (int j = 0; j < cont_k; ++j) {
                auto out = open_output(fs::path(cont_common.output_dir) /
                                       ("eigenfunction_" + std::to_string(j + 1) + ".csv"));
                out << "node_x,node_y,v,u\n";
                char buf[160];
                for (int id = 0; id < mesh.n_nodes(); ++id) {
                    const auto c = mesh.node_coords(id);
                    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", c[0], c[1],
                                  spectrum.vectors_v(id, j), spectrum.vectors_u(id, j));
                    out << buf;
                }
            }
        if (cont_export) {
            {
                auto out = open_output(fs::path(cont_common.output_dir) / "stiffness.mtx");
                write_matrix_market(out, system.stiffness);
            }
            {
                auto out = open_output(fs::path(cont_common.output_dir) / "mass.mtx");
                write_matrix_market(out, system.mass);
            }
        }
        std::cerr << "continuum spectrum (" << mesh.n_nodes() << " nodes) written to "
                  << cont_common.output_dir << "\n";
    });

    // ----------------------------------------------------------------- sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep and emit reports");
    CommonOpts sweep_common;
    int sweep_jobs = 1, sweep_trials = 0;
    std::uint64_t sweep_seed = 0;
    double sw_p = 0.0, sw_q = 0.0, sw_r = 0.0;
    add_common_flags(sweep_cmd, sweep_common);
    sweep_cmd->add_option("--jobs", sweep_jobs, "worker count (1 = deterministic output)");
    sweep_cmd->add_option("--trials", sweep_trials, "override trial count");
    sweep_cmd->add_option("--seed", sweep_seed, "override base seed");
    sweep_cmd->add_option("-p", sw_p, "override exponent p");
    sweep_cmd->add_option("-q", sw_q, "override exponent q");
    sweep_cmd->add_option("-r", sw_r, "override exponent r");
    sweep_cmd->callback([&] {
        if (sweep_common.config_path.empty())
            throw ConfigError("sweep: --config <file.json> is required");
        auto j = load_json(sweep_common.config_path);
        if (sweep_cmd->count("--trials")) j["trials"] = sweep_trials;
        if (sweep_cmd->count("--seed")) j["base_seed"] = sweep_seed;
        if (sweep_cmd->count("--jobs")) j["jobs"] = sweep_jobs;
        if (sweep_cmd->count("-p")) j["p"] = sw_p;
        if (sweep_cmd->count("-q")) j["q"] = sw_q;
        if (sweep_cmd->count("-r")) j["r"] = sw_r;
        const auto config = SweepConfig::from_json(j);
        const auto result = run_sweep(config);
        emit_report(result, sweep_common.output_dir);
        std::cerr << "sweep finished; report in " << sweep_common.output_dir << "\n";
    });

    // --------------------------------------------------------------- cheeger
    auto* cheeger_cmd = app.add_subcommand("cheeger", "1d weighted Cheeger lower-bound check");
    std::string cheeger_profile = "uniform";
    double ch_p = 0.5, ch_q = 1.0, ch_r = 0.5, ch_eps = 0.05;
    int ch_grid = 4096;
    cheeger_cmd->add_option("--profile", cheeger_profile, "density profile: uniform or twobump");
    cheeger_cmd->add_option("--epsilon", ch_eps, "floor level for the twobump profile");
    cheeger_cmd->add_option("-p", ch_p, "exponent p");
    cheeger_cmd->add_option("-q", ch_q, "exponent q");
    cheeger_cmd->add_option("-r", ch_r, "exponent r");
    cheeger_cmd->add_option("--n-grid", ch_grid, "1d mesh cells");
    cheeger_cmd->callback([&] {
        Density1D profile = Density1D::uniform();
        if (cheeger_profile == "twobump")
            profile = Density1D::two_bump(ch_eps);
        else if (cheeger_profile != "uniform")
            throw ConfigError("cheeger: unknown profile " + cheeger_profile);
        const auto res = cheeger_check_1d(profile, PQRParams{ch_p, ch_q, ch_r}, ch_grid);
        std::cout << "h=" << res.h << " bound=" << res.lower_bound << " sigma2=" << res.sigma2
                  << " " << (res.pass ? "PASS" : "FAIL") << "\n";
    });

    // ------------------------------------------------------------ invariance
    auto* inv_cmd = app.add_subcommand("invariance",
                                       "spectrum invariance under equal (p+r, q) parameter pairs");
    int inv_n = 512, inv_k = 6;
    std::uint64_t inv_seed = 42;
    double inv_p1 = 1.0, inv_r1 = 0.0, inv_p2 = 1.5, inv_r2 = 0.5, inv_q = 2.0;
    inv_cmd->add_option("-n,--n-vertices", inv_n, "number of samples");
    inv_cmd->add_option("--seed", inv_seed, "RNG seed");
    inv_cmd->add_option("--p1", inv_p1, "first p");
    inv_cmd->add_option("--r1", inv_r1, "first r");
    inv_cmd->add_option("--p2", inv_p2, "second p");
    inv_cmd->add_option("--r2", inv_r2, "second r");
    inv_cmd->add_option("-q", inv_q, "shared q");
    inv_cmd->callback([&] {
        const auto model = DensityModel::piecewise_constant(0.25);
        const auto batch = model.sample(inv_n, inv_seed);
        const double delta = delta_rule(inv_n);
        const KernelSpec kernel(KernelProfile::Indicator, delta, 2);
        const auto graph = reweight(build_raw_graph(batch, kernel), inv_q);
        const double disc = verify_pqr_invariance(graph, PQRParams{inv_p1, inv_q, inv_r1},
                                                  PQRParams{inv_p2, inv_q, inv_r2}, inv_k);
        std::cout << "max_discrepancy=" << disc << "\n";
    });

    // ---------------------------------------------------------------- report
    auto* report_cmd = app.add_subcommand("report", "bundled slope-table reproductions");
    CommonOpts report_common;
    std::string report_preset = "tab41";
    int report_cells = 200;
    add_common_flags(report_cmd, report_common);
    report_cmd->add_option("--preset", report_preset, "tab41, tab42 or tab43");
    report_cmd->add_option("--n-cells", report_cells, "mesh cells per axis");
    report_cmd->callback([&] {
        std::vector<PQRParams> rows;
        if (report_preset == "tab41")
            rows = {{0.5, 1.0, 0.5}, {1.0, 2.0, 1.0}, {1.0, 1.5, 0.5}};
        else if (report_preset == "tab42")
            rows = {{0.5, 1.5, 0.5}, {0.5, 2.0, 0.5}, {1.0, 2.0, 0.5}};
        else if (report_preset == "tab43")
            rows = {{1.0, 0.5, 1.0}, {1.0, 1.0, 1.0}, {0.5, 0.5, 1.0}};
        else
            throw ConfigError("report: unknown preset " + report_preset);

        ensure_dir(report_common.output_dir);
        nlohmann::json table = nlohmann::json::array();
        auto csv = open_output(fs::path(report_common.output_dir) / "table.csv");
        csv << "p,q,r,sigma2_slope,sigma2_stderr,ratio_slope,ratio_stderr\n";
        for (const auto& params : rows) {
            SweepConfig cfg;
            cfg.mode = SweepMode::EpsilonContinuum;
            cfg.params = params;
            cfg.density_template = DensityModel::erf_clusters(DomainBox::centered_square(), 0.025,
                                                              paper_geometry(2));
            cfg.sweep_values = {1.0 / 40, 1.0 / 80, 1.0 / 160, 1.0 / 320};
            cfg.n_cells = report_cells;
            cfg.k_eigen = 3;
            const auto result = run_sweep(cfg);
            std::ostringstream dir;
            dir << report_common.output_dir << "/" << report_preset << "_p" << params.p << "_q"
                << params.q << "_r" << params.r;
            emit_report(result, dir.str());
            csv << params.p << "," << params.q << "," << params.r << ","
                << result.sigma_K_slope.slope << "," << result.sigma_K_slope.stderr_slope << ","
                << result.ratio_slope.slope << "," << result.ratio_slope.stderr_slope << "\n";
            table.push_back({{"p", params.p},
                             {"q", params.q},
                             {"r", params.r},
                             {"sigma2_slope", result.sigma_K_slope.slope},
                             {"ratio_slope", result.ratio_slope.slope}});
            std::cerr << "row (" << params.p << "," << params.q << "," << params.r
                      << "): sigma2 slope " << result.sigma_K_slope.slope << ", ratio slope "
                      << result.ratio_slope.slope << "\n";
        }
        auto js = open_output(fs::path(report_common.output_dir) / "summary.json");
        js << nlohmann::json{{"version", kVersionString},
                             {"preset", report_preset},
                             {"rows", table}}
                  .dump(2)
           << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exit 0
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the usage message
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_app(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericsError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
