#include "mids/cli.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "mids/dynamics.hpp"
#include "mids/fixtures.hpp"
#include "mids/gossip.hpp"
#include "mids/graph.hpp"
#include "mids/identify.hpp"
#include "mids/io.hpp"
#include "mids/spectra.hpp"

namespace mids::cli {

namespace {

using io::json;
namespace fs = std::filesystem;

struct Loaded {
    NetworkModel model;
    std::string digest;
};

// Thrown when a run finished but its outcome maps to a non-zero exit code.
struct ExitWith {
    int code;
};

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotConvergent:
        case ErrorCode::ObliviousAgentsPresent:
            return kNotConvergent;
        default:
            return kValidationFailure;
    }
}

Loaded load_model(const std::string& path) {
    const std::string text = io::read_text_file(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    return {normalize_model(validate_model(io::model_from_json(doc))), "sha256:" + sha256_hex(text)};
}

json manifest(const std::string& subcommand, json config, const std::string& digest) {
    json m;
    m["subcommand"] = subcommand;
    m["tool_version"] = kToolVersion;
    m["input_digest"] = digest;
    m["config"] = std::move(config);
    return m;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
    } else {
        io::write_text_file(path, text);
    }
}

std::string csv_number(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

std::string coordinate_header(std::size_t n, std::size_t m, const std::string& prefix) {
    std::string h;
    for (std::size_t a = 1; a <= n; ++a) {
        for (std::size_t p = 1; p <= m; ++p) h += "," + prefix + std::to_string(a) + "_" + std::to_string(p);
    }
    return h;
}

json spectral_json(const SpectralReport& s) {
    json j;
    j["rho_LW"] = s.rho_LW;
    j["rho_C"] = s.rho_C;
    j["product"] = s.rho_LW * s.rho_C;
    j["stable"] = s.stable;
    j["regular_C"] = s.regular_C;
    j["C_star"] = s.C_star ? io::to_json(*s.C_star) : json(nullptr);
    j["regular_W22"] = s.regular_W22 ? json(*s.regular_W22) : json(nullptr);
    j["fully_regular_W22"] = s.fully_regular_W22 ? json(*s.fully_regular_W22) : json(nullptr);
    j["W22_star"] = s.W22_star ? io::to_json(*s.W22_star) : json(nullptr);
    j["W22_star_forced_zero"] = s.W22_star_forced_zero;
    j["A_star"] = s.A_star ? io::to_json(*s.A_star) : json(nullptr);
    return j;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
    std::string model;
    std::string out;
};

void cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
    const auto [model, digest] = load_model(a.model);
    const auto graph = build_graph(model);
    const auto cls = classify_agents(model, graph);
    const auto spec = analyze_spectrum(model, cls);

    json agents = json::array();
    for (std::size_t i = 0; i < model.n(); ++i) {
        agents.push_back({{"index", i}, {"status", std::string(to_string(cls.status[i]))}});
    }
    json doc;
    doc["manifest"] = manifest("analyze", {{"model", a.model}, {"normalized", true}}, digest);
    doc["n"] = model.n();
    doc["m"] = model.m();
    doc["arc_count"] = graph.arc_count();
    doc["agents"] = std::move(agents);
    doc["n_prime"] = cls.n_prime;
    doc["permutation"] = cls.permutation;
    doc["blocks"] = {{"non_oblivious", cls.n_prime}, {"oblivious", model.n() - cls.n_prime}};
    doc["spectral"] = spectral_json(spec);
    doc["verdict"] = to_string(spec.verdict);
    doc["clause"] = spec.clause;
    emit(a.out, doc.dump(2) + "\n", out);
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
    std::string model;
    std::string out;
    std::size_t steps = 10'000;
    double tol = kDefaultConvTol;
};

void cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    const auto [model, digest] = load_model(a.model);
    const auto traj = simulate(model, a.steps, a.tol);

    json cfg = {{"model", a.model}, {"max_steps", a.steps}, {"conv_tol", a.tol}};
    json man = manifest("simulate", cfg, digest);
    man["termination"] = to_string(traj.termination);
    man["final_k"] = traj.states.back().k;

    std::ostringstream csv;
    csv << "# manifest: " << man.dump() << "\n";
    csv << "k" << coordinate_header(model.n(), model.m(), "x") << "\n";
    for (const auto& s : traj.states) {
        csv << s.k;
        for (Eigen::Index i = 0; i < s.x.size(); ++i) csv << ',' << csv_number(s.x(i));
        csv << '\n';
    }
    emit(a.out, csv.str(), out);
}

// ---- limit -----------------------------------------------------------------

struct LimitArgs {
    std::string model;
    std::string out;
};

void cmd_limit(const LimitArgs& a, std::ostream& out) {
    const auto [model, digest] = load_model(a.model);
    const auto cls = classify_agents(model, build_graph(model));
    const auto spec = analyze_spectrum(model, cls);
    const Vector x = limit_opinion(model, cls, spec);

    json doc;
    doc["manifest"] = manifest("limit", {{"model", a.model}}, digest);
    doc["verdict"] = to_string(spec.verdict);
    doc["clause"] = spec.clause;
    doc["limit"] = io::to_json_vector(x);
    doc["limit_by_agent"] = io::to_json_stacked(x, model.m());
    emit(a.out, doc.dump(2) + "\n", out);
}

// ---- gossip ----------------------------------------------------------------

struct GossipArgs {
    std::string model;
    std::string out;
    std::string summary;
    std::uint64_t seed = 0;
    double steps = 1e6;
    std::size_t replications = 1;
    std::vector<double> checkpoints;
    std::uint64_t tail_window = 10'000;
    unsigned threads = 0;
};

std::uint64_t as_count(double v, const char* name) {
    if (!(v >= 0.0) || v > 1e18 || v != std::floor(v)) {
        throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be a non-negative integer");
    }
    return static_cast<std::uint64_t>(v);
}

void cmd_gossip(const GossipArgs& a, std::ostream& out) {
    const auto [model, digest] = load_model(a.model);
    GossipConfig cfg = default_config(model);
    cfg.seed = a.seed;
    cfg.steps = as_count(a.steps, "steps");
    cfg.replications = a.replications;
    cfg.tail_window = a.tail_window;
    cfg.threads = a.threads;
    for (double k : a.checkpoints) cfg.checkpoints.push_back(as_count(k, "checkpoint"));
    if (cfg.checkpoints.empty()) cfg.checkpoints = log_grid(cfg.steps);

    const auto stats = run(model, cfg);

    json config = {{"model", a.model},           {"steps", cfg.steps},
                   {"replications", cfg.replications}, {"checkpoints", cfg.checkpoints},
                   {"tail_window", cfg.tail_window}, {"gamma", "default"}};
    json man = manifest("gossip", config, digest);
    man["generator"] = stats.generator;
    man["master_seed"] = stats.master_seed;
    man["seed_split"] = "splitmix64(seed + (r + 1) * 0x9E3779B97F4A7C15)";

    std::ostringstream csv;
    csv << "# manifest: " << man.dump() << "\n";
    csv << "replication,k" << coordinate_header(model.n(), model.m(), "xbar") << ",dist2,dist_inf\n";
    for (std::size_t r = 0; r < stats.replications.size(); ++r) {
        for (const auto& cp : stats.replications[r].checkpoints) {
            csv << r << ',' << cp.k;
            for (Eigen::Index i = 0; i < cp.mean.size(); ++i) csv << ',' << csv_number(cp.mean(i));
            csv << ',' << csv_number(cp.dist2) << ',' << csv_number(cp.dist_inf) << '\n';
        }
    }

    json summary;
    summary["manifest"] = man;
    summary["arc_count"] = stats.arc_count;
    summary["reference"] = io::to_json_vector(stats.reference);
    json med = json::array();
    const auto& cps = stats.replications.front().checkpoints;
    for (std::size_t c = 0; c < cps.size(); ++c) {
        med.push_back({{"k", cps[c].k}, {"median_dist2", stats.median_dist2(c)},
                       {"median_dist_inf", stats.median_dist_inf(c)}});
    }
    summary["checkpoints"] = std::move(med);
    json reps = json::array();
    for (const auto& r : stats.replications) {
        reps.push_back({{"seed", r.seed},
                        {"cesaro", io::to_json_vector(r.cesaro)},
                        {"final_sample", io::to_json_vector(r.final_sample)},
                        {"tail_max_deviation", r.tail_max_deviation}});
    }
    summary["replications"] = std::move(reps);

    emit(a.out, csv.str(), out);
    if (!a.summary.empty()) emit(a.summary, summary.dump(2) + "\n", out);
}

// ---- identify --------------------------------------------------------------

struct IdentifyArgs {
    std::string input;
    std::string out;
    std::string mode = "auto";
    ConstraintSet constraint = ConstraintSet::RowStochastic;
    Objective objective = Objective::SumSquares;
    std::size_t max_iterations = kMaxSolverIterations;
};

void cmd_identify(const IdentifyArgs& a, std::ostream& out) {
    const std::string text = io::read_text_file(a.input);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, a.input + ": " + e.what());
    }
    IdentificationProblem p = io::identification_from_json(doc);
    const bool finite = std::holds_alternative<FiniteHorizon>(p.data);
    if ((a.mode == "finite" && !finite) || (a.mode == "infinite" && finite)) {
        throw Error(ErrorCode::InvalidArgument, "--mode " + a.mode + " does not match the data in " + a.input);
    }
    p.constraint = a.constraint;
    p.objective = a.objective;
    SolverOptions opts;
    opts.max_iterations = a.max_iterations;
    const auto res = solve(p, opts);

    json cfg = {{"input", a.input},
                {"mode", finite ? "finite" : "infinite"},
                {"constraint", to_string(a.constraint)},
                {"objective", to_string(a.objective)},
                {"max_iterations", a.max_iterations},
                {"tolerance", kProjectedGradientTol}};
    json result;
    result["manifest"] = manifest("identify", cfg, "sha256:" + sha256_hex(text));
    result["C"] = io::to_json(res.C);
    result["residual"] = res.residual;
    result["objective_value"] = res.objective_value;
    result["diagnostics"] = {
        {"iterations", res.iterations},
        {"projected_gradient_norm", std::isfinite(res.projected_gradient_norm) ? json(res.projected_gradient_norm) : json(nullptr)},
        {"converged", res.converged},
        {"approximate", res.approximate},
        {"condition_number", std::isfinite(res.condition_number) ? json(res.condition_number) : json("inf")},
        {"rank", res.rank},
        {"stable_estimate", res.stable_estimate},
    };
    emit(a.out, result.dump(2) + "\n", out);
    if (!res.converged) throw ExitWith{kSolverNotConverged};
}

// ---- fixtures --------------------------------------------------------------

struct FixturesArgs {
    std::string dir = "fixtures";
    std::uint64_t hierarchy_seed = fixtures::kHierarchySeed;
};

void cmd_fixtures(const FixturesArgs& a, std::ostream& out) {
    fs::create_directories(a.dir);
    for (const auto& f : fixtures::all(a.hierarchy_seed)) {
        const fs::path path = fs::path(a.dir) / f.file;
        io::write_text_file(path, f.json_text);
        out << path.string() << "\n";
    }
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream ss;
    for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return ss.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multidimensional Friedkin-Johnsen opinion dynamics toolkit", "mids"};
    app.set_version_flag("--version", kToolVersion);
    app.set_config("--config", "", "Read options from a TOML/INI file (command-line flags take precedence)");
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto* sa = app.add_subcommand("analyze", "Classify agents and report stability / convergence");
    sa->add_option("model", analyze.model, "Model JSON file")->required()->check(CLI::ExistingFile);
    sa->add_option("-o,--out", analyze.out, "Write the report here instead of stdout");

    SimulateArgs simulate_args;
    auto* ss = app.add_subcommand("simulate", "Run the synchronous dynamics and emit the trajectory as CSV");
    ss->add_option("model", simulate_args.model, "Model JSON file")->required()->check(CLI::ExistingFile);
    ss->add_option("-o,--out", simulate_args.out, "CSV output file (stdout when absent)");
    ss->add_option("--steps", simulate_args.steps, "Maximum number of steps")->capture_default_str();
    ss->add_option("--tol", simulate_args.tol, "Sup-norm increment that counts as converged")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    LimitArgs limit_args;
    auto* sl = app.add_subcommand("limit", "Closed-form limit opinion (exit 3 when it does not exist)");
    sl->add_option("model", limit_args.model, "Model JSON file")->required()->check(CLI::ExistingFile);
    sl->add_option("-o,--out", limit_args.out, "JSON output file");

    GossipArgs gossip_args;
    auto* sg = app.add_subcommand("gossip", "Randomized arc-activation protocol with Cesaro averaging");
    sg->add_option("model", gossip_args.model, "Model JSON file")->required()->check(CLI::ExistingFile);
    sg->add_option("-o,--out", gossip_args.out, "CSV of Cesaro averages at the checkpoints");
    sg->add_option("--summary", gossip_args.summary, "JSON summary file");
    sg->add_option("--seed", gossip_args.seed, "Master seed")->capture_default_str();
    sg->add_option("--steps", gossip_args.steps, "Number of arc activations (1e6 notation accepted)")->capture_default_str();
    sg->add_option("--replications", gossip_args.replications, "Independent sample paths")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sg->add_option("--checkpoints", gossip_args.checkpoints, "Steps at which averages are recorded (default 1,2,5 per decade)")
        ->delimiter(',');
    sg->add_option("--tail-window", gossip_args.tail_window, "Steps over which sample deviation is tracked")->capture_default_str();
    sg->add_option("--threads", gossip_args.threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();

    IdentifyArgs ident;
    const std::map<std::string, ConstraintSet> constraints{{"none", ConstraintSet::Unconstrained},
                                                           {"stochastic", ConstraintSet::RowStochastic},
                                                           {"infnorm", ConstraintSet::InfNormBall}};
    const std::map<std::string, Objective> objectives{{"sumsquares", Objective::SumSquares},
                                                      {"sumabs", Objective::SumAbs},
                                                      {"maxabs", Objective::MaxAbs}};
    auto* si = app.add_subcommand("identify", "Estimate the coupling matrix C from observed opinions");
    si->add_option("input", ident.input, "Identification JSON file")->required()->check(CLI::ExistingFile);
    si->add_option("-o,--out", ident.out, "JSON output file");
    si->add_option("--mode", ident.mode, "finite | infinite | auto (from the data present)")
        ->capture_default_str()
        ->check(CLI::IsMember({"auto", "finite", "infinite"}));
    si->add_option("--constraint", ident.constraint, "none | stochastic | infnorm")
        ->transform(CLI::CheckedTransformer(constraints, CLI::ignore_case))
        ->capture_default_str();
    si->add_option("--objective", ident.objective, "sumsquares | sumabs | maxabs")
        ->transform(CLI::CheckedTransformer(objectives, CLI::ignore_case))
        ->capture_default_str();
    si->add_option("--max-iterations", ident.max_iterations, "Solver iteration cap")->capture_default_str();

    FixturesArgs fix;
    auto* sf = app.add_subcommand("fixtures", "Write the bundled example models");
    sf->add_option("--dir", fix.dir, "Output directory")->capture_default_str();
    sf->add_option("--hierarchy-seed", fix.hierarchy_seed, "Seed of the 51-agent hierarchy")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << "\n";
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << json{{"error", "UsageError"}, {"message", e.what()}}.dump() << "\n";
        return kValidationFailure;
    }

    try {
        if (sa->parsed()) cmd_analyze(analyze, out);
        if (ss->parsed()) cmd_simulate(simulate_args, out);
        if (sl->parsed()) cmd_limit(limit_args, out);
        if (sg->parsed()) cmd_gossip(gossip_args, out);
        if (si->parsed()) cmd_identify(ident, out);
        if (sf->parsed()) cmd_fixtures(fix, out);
    } catch (const ExitWith& e) {
        return e.code;
    } catch (const Error& e) {
        err << json{{"error", to_string(e.code())}, {"message", e.what()}}.dump() << "\n";
        return exit_code_for(e.code());
    } catch (const json::exception& e) {
        err << json{{"error", "ParseError"}, {"message", e.what()}}.dump() << "\n";
        return kValidationFailure;
    }
    return kSuccess;
}

}  // namespace mids::cli
