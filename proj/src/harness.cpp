#include "ncac/harness.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ncac/adaptation.hpp"
#include "ncac/errors.hpp"
#include "ncac/format.hpp"
#include "ncac/io.hpp"
#include "ncac/json_util.hpp"
#include "ncac/network.hpp"
#include "ncac/pci.hpp"
#include "ncac/phi.hpp"
#include "ncac/snn.hpp"
#include "ncac/version.hpp"

namespace ncac {
namespace {

namespace fs = std::filesystem;
using jsonu::json;

constexpr std::array<double, 2> kPciReferenceBand{0.31, 0.70};

std::string iso_utc_now() {
    const std::time_t tt = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Everything one command run needs: the parsed config, resolved paths, and
// the manifest being assembled. Data paths in configs resolve relative to the
// config file's directory.
struct RunContext {
    std::string command;
    json config;
    fs::path config_dir;
    fs::path out_dir;
    std::optional<std::uint64_t> seed_override;

    std::string config_hash;
    std::string started;
    std::optional<std::uint64_t> seed_used;
    std::vector<std::pair<std::string, std::uint64_t>> inputs; // path, digest
    std::vector<std::string> outputs;

    fs::path resolve(const std::string& p) const {
        const fs::path q(p);
        return q.is_absolute() ? q : config_dir / q;
    }

    // Registers a data file as a manifest input and returns its resolved path.
    fs::path input_file(const std::string& p) {
        const fs::path resolved = resolve(p);
        inputs.push_back({resolved.string(), io::fnv1a64(io::read_file(resolved))});
        return resolved;
    }

    std::uint64_t seed_from(const json& obj, const std::string& where) {
        const std::uint64_t s =
            seed_override ? *seed_override : jsonu::get_uint64_or(obj, where, "seed", 0);
        seed_used = s;
        return s;
    }

    void write_manifest() {
        std::ostringstream out;
        out << "{\n  \"tool_version\": \"" << kVersion << "\",\n  \"command\": \"" << command
            << "\",\n  \"config_hash\": \"fnv1a64:" << config_hash << "\",\n  \"seed\": ";
        if (seed_used)
            out << *seed_used;
        else
            out << "null";
        out << ",\n  \"started\": \"" << started << "\",\n  \"finished\": \"" << iso_utc_now()
            << "\",\n  \"inputs\": [";
        for (std::size_t i = 0; i < inputs.size(); ++i)
            out << (i ? ",\n" : "\n") << "    {\"path\": " << json(inputs[i].first).dump()
                << ", \"digest\": \"fnv1a64:" << io::hex64(inputs[i].second) << "\"}";
        out << (inputs.empty() ? "" : "\n  ") << "],\n  \"outputs\": [";
        for (std::size_t i = 0; i < outputs.size(); ++i)
            out << (i ? ", " : "") << json(outputs[i]).dump();
        out << "]\n}\n";
        io::write_file(out_dir / "manifest.json", out.str());
    }
};

RunContext make_context(const std::string& command, const CliOptions& opts) {
    RunContext ctx;
    ctx.command = command;
    ctx.started = iso_utc_now();
    ctx.seed_override = opts.seed;
    const fs::path config_path(opts.config_path);
    const std::string bytes = io::read_file(config_path);
    ctx.inputs.push_back({config_path.string(), io::fnv1a64(bytes)});
    try {
        ctx.config = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw ConfigError(config_path.string() + ": " + e.what());
    }
    ctx.config_dir = config_path.has_parent_path() ? config_path.parent_path() : fs::path(".");
    ctx.out_dir = opts.out_dir.empty() ? fs::path(".") : fs::path(opts.out_dir);
    fs::create_directories(ctx.out_dir);
    ctx.config_hash = io::hex64(io::fnv1a64(ctx.config.dump()));
    return ctx;
}

// --- simulate -----------------------------------------------------------------

Eigen::MatrixXd stimulus_from_config(RunContext& ctx, const json& spec, int steps, int n) {
    if (spec.is_string())
        {
            const Eigen::MatrixXd m = io::load_matrix_csv(ctx.input_file(spec.get<std::string>()));
            if (m.rows() != steps || m.cols() != n)
                throw ConfigError("stimulus must be steps x n (" + std::to_string(steps) + " x " +
                                  std::to_string(n) + "), file has " + std::to_string(m.rows()) +
                                  " x " + std::to_string(m.cols()));
            return m;
        }
    jsonu::check_keys(spec, "config.stimulus", {"constant"}, {});
    const json& c = spec.at("constant");
    Eigen::VectorXd per_neuron(n);
    if (c.is_number()) {
        per_neuron.setConstant(c.get<double>());
    } else if (c.is_array()) {
        if (static_cast<int>(c.size()) != n)
            throw ConfigError("config.stimulus.constant: need one value per neuron");
        for (int i = 0; i < n; ++i) {
            if (!c[i].is_number())
                throw ConfigError("config.stimulus.constant[" + std::to_string(i) +
                                  "]: expected a number");
            per_neuron(i) = c[i].get<double>();
        }
    } else {
        throw ConfigError("config.stimulus.constant: expected a number or array");
    }
    return per_neuron.transpose().replicate(steps, 1);
}

StdpRule stdp_from_config(const json& block, const std::string& where) {
    jsonu::check_keys(block, where, {},
                      {"a_plus", "a_minus", "tau_plus", "tau_minus", "w_min", "w_max"});
    StdpRule r;
    r.a_plus = jsonu::get_double_or(block, where, "a_plus", r.a_plus);
    r.a_minus = jsonu::get_double_or(block, where, "a_minus", r.a_minus);
    r.tau_plus = jsonu::get_double_or(block, where, "tau_plus", r.tau_plus);
    r.tau_minus = jsonu::get_double_or(block, where, "tau_minus", r.tau_minus);
    r.w_min = jsonu::get_double_or(block, where, "w_min", r.w_min);
    r.w_max = jsonu::get_double_or(block, where, "w_max", r.w_max);
    if (!(r.tau_plus > 0.0) || !(r.tau_minus > 0.0))
        throw ConfigError(where + ": STDP time constants must be > 0");
    if (!(r.w_min <= r.w_max)) throw ConfigError(where + ": need w_min <= w_max");
    return r;
}

int cmd_simulate(RunContext& ctx) {
    jsonu::check_keys(ctx.config, "config", {"snn", "steps", "stimulus"},
                      {"bin_width", "stdp", "seed"});
    SpikingNetwork net =
        io::load_spiking_network(ctx.input_file(jsonu::get_string(ctx.config, "config", "snn")));
    const int steps = static_cast<int>(jsonu::get_int(ctx.config, "config", "steps"));
    if (steps < 1) throw ConfigError("config.steps must be >= 1");
    const int bin_width = static_cast<int>(jsonu::get_int_or(ctx.config, "config", "bin_width", 5));
    const std::uint64_t seed = ctx.seed_from(ctx.config, "config");
    const Eigen::MatrixXd stimulus =
        stimulus_from_config(ctx, ctx.config.at("stimulus"), steps, net.n);

    std::optional<StdpRule> stdp;
    if (ctx.config.contains("stdp")) stdp = stdp_from_config(ctx.config.at("stdp"), "config.stdp");

    const SpikeRaster raster = run(net, stimulus, steps, stdp, seed);
    const std::vector<StateIndex> states = binarize_raster(raster, bin_width);

    ctx.outputs = {"raster.csv", "states.csv"};
    if (stdp) ctx.outputs.push_back("weights_final.csv");
    ctx.write_manifest();
    io::save_raster(raster, ctx.out_dir / "raster.csv");
    io::save_states(states, ctx.out_dir / "states.csv");
    if (stdp) io::save_matrix_csv(net.weights, ctx.out_dir / "weights_final.csv");
    return 0;
}

// --- phi ----------------------------------------------------------------------

Tpm tpm_from_config(RunContext& ctx) {
    const bool has_net = ctx.config.contains("network");
    const bool has_tpm = ctx.config.contains("tpm");
    if (has_net == has_tpm)
        throw ConfigError("config: exactly one of 'network' or 'tpm' is required");
    if (has_net)
        return build_tpm(
            io::load_network(ctx.input_file(jsonu::get_string(ctx.config, "config", "network"))));
    return io::load_tpm(ctx.input_file(jsonu::get_string(ctx.config, "config", "tpm")));
}

int cmd_phi(RunContext& ctx) {
    jsonu::check_keys(ctx.config, "config", {"state"},
                      {"network", "tpm", "direction", "metric", "weighting", "threads",
                       "hard_cap", "seed"});
    const Tpm tpm = tpm_from_config(ctx);
    const Direction dir =
        direction_from_string(jsonu::get_string_or(ctx.config, "config", "direction", "min"));
    const Metric metric =
        metric_from_string(jsonu::get_string_or(ctx.config, "config", "metric", "kl"));
    const int threads = static_cast<int>(jsonu::get_int_or(ctx.config, "config", "threads", 0));
    const int hard_cap = static_cast<int>(jsonu::get_int_or(ctx.config, "config", "hard_cap", 16));

    const json& state = ctx.config.at("state");
    if (state.is_string()) {
        if (state.get<std::string>() != "mean")
            throw ConfigError("config.state: expected an integer or \"mean\"");
        std::optional<Eigen::VectorXd> weighting; // empty = uniform
        if (ctx.config.contains("weighting")) {
            const json& w = ctx.config.at("weighting");
            if (w.is_string()) {
                if (w.get<std::string>() != "uniform")
                    throw ConfigError("config.weighting: expected \"uniform\" or an "
                                      "empirical block");
            } else {
                jsonu::check_keys(w, "config.weighting", {"kind", "burn_in", "samples"},
                                  {"start"});
                if (jsonu::get_string(w, "config.weighting", "kind") != "empirical")
                    throw ConfigError("config.weighting.kind: expected \"empirical\"");
                const long burn_in = jsonu::get_int(w, "config.weighting", "burn_in");
                const long samples = jsonu::get_int(w, "config.weighting", "samples");
                const long start = jsonu::get_int_or(w, "config.weighting", "start", 0);
                const std::uint64_t seed = ctx.seed_from(ctx.config, "config");
                weighting = stationary_distribution(tpm, static_cast<int>(burn_in),
                                                    static_cast<int>(samples), seed,
                                                    static_cast<StateIndex>(start));
            }
        }
        const PhiBarResult res = phi_mean(tpm, weighting, dir, metric, threads, hard_cap);
        ctx.outputs = {"phibar.csv"};
        ctx.write_manifest();
        io::save_phi_bar(res, ctx.out_dir / "phibar.csv");
        return 0;
    }
    if (!state.is_number_integer())
        throw ConfigError("config.state: expected an integer or \"mean\"");
    const long s = state.get<long>();
    if (s < 0 || s >= (1L << tpm.n))
        throw ConfigError("config.state: " + std::to_string(s) + " out of range for n=" +
                          std::to_string(tpm.n));
    const PhiResult res =
        find_mip(tpm, static_cast<StateIndex>(s), dir, metric, threads, hard_cap);
    ctx.outputs = {"phi.json"};
    ctx.write_manifest();
    io::save_phi_result(res, ctx.out_dir / "phi.json");
    return 0;
}

// --- pci ----------------------------------------------------------------------

int cmd_pci(RunContext& ctx) {
    jsonu::check_keys(ctx.config, "config", {"snn", "perturbation"}, {"k", "seed"});
    const SpikingNetwork net =
        io::load_spiking_network(ctx.input_file(jsonu::get_string(ctx.config, "config", "snn")));

    const json& pb = ctx.config.at("perturbation");
    jsonu::check_keys(pb, "config.perturbation",
                      {"targets", "amplitude", "onset_step", "duration_steps", "trials",
                       "baseline_steps", "response_steps"},
                      {});
    PerturbationSpec spec;
    const json& targets = pb.at("targets");
    if (!targets.is_array()) throw ConfigError("config.perturbation.targets: expected an array");
    for (const auto& t : targets) {
        if (!t.is_number_integer())
            throw ConfigError("config.perturbation.targets: expected integers");
        spec.target_neurons.push_back(t.get<int>());
    }
    spec.amplitude = jsonu::get_double(pb, "config.perturbation", "amplitude");
    spec.onset_step = static_cast<int>(jsonu::get_int(pb, "config.perturbation", "onset_step"));
    spec.duration_steps =
        static_cast<int>(jsonu::get_int(pb, "config.perturbation", "duration_steps"));
    spec.trials = static_cast<int>(jsonu::get_int(pb, "config.perturbation", "trials"));
    spec.baseline_steps =
        static_cast<int>(jsonu::get_int(pb, "config.perturbation", "baseline_steps"));
    spec.response_steps =
        static_cast<int>(jsonu::get_int(pb, "config.perturbation", "response_steps"));

    const double k = jsonu::get_double_or(ctx.config, "config", "k", 3.0);
    const std::uint64_t seed = ctx.seed_from(ctx.config, "config");

    const ResponseMatrix rm = perturb_and_record(net, spec, seed);
    const BinaryResponse br = binarize_responses(rm, k);
    const PciResult res = pci(br);

    ctx.outputs = {"pci.json", "binary.csv"};
    ctx.write_manifest();
    io::save_pci_result(res, kPciReferenceBand, ctx.out_dir / "pci.json");
    io::save_binary_matrix(br.significance, ctx.out_dir / "binary.csv");
    return 0;
}

// --- adapt --------------------------------------------------------------------

int cmd_adapt(RunContext& ctx) {
    jsonu::check_keys(ctx.config, "config", {"network", "target"},
                      {"loss", "phi", "optimizer", "seed"});
    const CausalNetwork net =
        io::load_network(ctx.input_file(jsonu::get_string(ctx.config, "config", "network")));

    const json& tgt = ctx.config.at("target");
    if (!tgt.is_array() || tgt.empty())
        throw ConfigError("config.target: expected a nonempty array");
    PhiTarget target;
    for (std::size_t i = 0; i < tgt.size(); ++i) {
        const std::string twhere = "config.target[" + std::to_string(i) + "]";
        jsonu::check_keys(tgt[i], twhere, {"state", "phi"}, {"weight"});
        PhiTargetEntry entry;
        const json& st = tgt[i].at("state");
        if (st.is_string()) {
            if (st.get<std::string>() != "mean")
                throw ConfigError(twhere + ".state: expected an integer or \"mean\"");
        } else if (st.is_number_integer()) {
            const long s = st.get<long>();
            if (s < 0 || s >= (1L << net.n))
                throw ConfigError(twhere + ".state: out of range for n=" +
                                  std::to_string(net.n));
            entry.state = static_cast<StateIndex>(s);
        } else {
            throw ConfigError(twhere + ".state: expected an integer or \"mean\"");
        }
        entry.phi_star = jsonu::get_double(tgt[i], twhere, "phi");
        entry.weight = jsonu::get_double_or(tgt[i], twhere, "weight", 1.0);
        target.entries.push_back(entry);
    }

    const std::string loss_s = jsonu::get_string_or(ctx.config, "config", "loss", "absolute");
    LossForm form;
    if (loss_s == "absolute")
        form = LossForm::Absolute;
    else if (loss_s == "squared")
        form = LossForm::Squared;
    else
        throw ConfigError("config.loss: expected \"absolute\" or \"squared\"");

    PhiProtocol proto;
    if (ctx.config.contains("phi")) {
        const json& pj = ctx.config.at("phi");
        jsonu::check_keys(pj, "config.phi",
                          {}, {"direction", "metric", "weighting", "threads", "hard_cap"});
        proto.direction =
            direction_from_string(jsonu::get_string_or(pj, "config.phi", "direction", "effect"));
        proto.metric = metric_from_string(jsonu::get_string_or(pj, "config.phi", "metric", "kl"));
        proto.threads = static_cast<int>(jsonu::get_int_or(pj, "config.phi", "threads", 1));
        proto.hard_cap = static_cast<int>(jsonu::get_int_or(pj, "config.phi", "hard_cap", 16));
        if (pj.contains("weighting") &&
            jsonu::get_string(pj, "config.phi", "weighting") != "uniform")
            throw ConfigError("config.phi.weighting: only \"uniform\" is supported during "
                              "adaptation (the TPM changes every evaluation)");
    }

    OptimizerConfig cfg;
    if (ctx.config.contains("optimizer")) {
        const json& oj = ctx.config.at("optimizer");
        jsonu::check_keys(oj, "config.optimizer", {},
                          {"kind", "a", "A", "alpha", "c", "gamma", "max_evals", "tol", "bounds",
                           "seed", "stagnation_window"});
        cfg.kind = optimizer_kind_from_string(
            jsonu::get_string_or(oj, "config.optimizer", "kind", "spsa"));
        cfg.a = jsonu::get_double_or(oj, "config.optimizer", "a", cfg.a);
        cfg.big_a = jsonu::get_double_or(oj, "config.optimizer", "A", cfg.big_a);
        cfg.alpha = jsonu::get_double_or(oj, "config.optimizer", "alpha", cfg.alpha);
        cfg.c = jsonu::get_double_or(oj, "config.optimizer", "c", cfg.c);
        cfg.gamma = jsonu::get_double_or(oj, "config.optimizer", "gamma", cfg.gamma);
        cfg.max_evals = jsonu::get_int_or(oj, "config.optimizer", "max_evals", cfg.max_evals);
        cfg.tol = jsonu::get_double_or(oj, "config.optimizer", "tol", cfg.tol);
        cfg.stagnation_window = jsonu::get_int_or(oj, "config.optimizer", "stagnation_window",
                                                  cfg.stagnation_window);
        if (oj.contains("bounds")) {
            const json& b = oj.at("bounds");
            if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
                throw ConfigError("config.optimizer.bounds: expected [lo, hi]");
            cfg.lo = b[0].get<double>();
            cfg.hi = b[1].get<double>();
        }
        cfg.seed = ctx.seed_override ? *ctx.seed_override
                                     : jsonu::get_uint64_or(oj, "config.optimizer", "seed", 0);
    } else {
        cfg.seed = ctx.seed_override.value_or(0);
    }
    ctx.seed_used = cfg.seed;

    auto [adapted, trace] = adapt(net, target, form, proto, cfg);

    ctx.outputs = {"adapted.json", "trace.csv"};
    ctx.write_manifest();
    io::save_network(adapted, ctx.out_dir / "adapted.json");
    io::save_trace(trace, ctx.out_dir / "trace.csv");
    if (!trace.converged) {
        std::cerr << "adapt: stopped without reaching tol (" << trace.stop_reason
                  << "); best loss " << fmt12(trace.best_loss) << "\n";
        return 4;
    }
    return 0;
}

// --- report -------------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable load_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    CsvTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                cells.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur.push_back(ch);
            }
        }
        cells.push_back(cur);
        if (table.header.empty())
            table.header = std::move(cells);
        else
            table.rows.push_back(std::move(cells));
    }
    if (table.header.empty()) throw ConfigError(path.string() + ": empty file");
    return table;
}

int cmd_report(RunContext& ctx) {
    jsonu::check_keys(ctx.config, "config", {"runs"}, {});
    const json& runs = ctx.config.at("runs");
    if (!runs.is_array() || runs.empty())
        throw ConfigError("config.runs: expected a nonempty array of run directories");

    std::ostringstream rj; // report.json
    std::ostringstream rc; // report.csv
    rj << "{\n  \"runs\": [";
    rc << "kind,run,x,y\n";

    for (std::size_t r = 0; r < runs.size(); ++r) {
        if (!runs[r].is_string())
            throw ConfigError("config.runs[" + std::to_string(r) + "]: expected a string");
        const std::string run_name = runs[r].get<std::string>();
        const fs::path dir = ctx.resolve(run_name);
        const fs::path phi_p = dir / "phi.json", phibar_p = dir / "phibar.csv",
                       pci_p = dir / "pci.json", trace_p = dir / "trace.csv";
        const bool has_phi = fs::exists(phi_p), has_phibar = fs::exists(phibar_p),
                   has_pci = fs::exists(pci_p), has_trace = fs::exists(trace_p);
        if (!has_phi && !has_phibar && !has_pci && !has_trace)
            throw ConfigError("run '" + run_name + "': expected at least one of " +
                              phi_p.string() + ", " + phibar_p.string() + ", " + pci_p.string() +
                              ", " + trace_p.string());

        rj << (r ? ",\n" : "\n") << "    {\"dir\": " << json(run_name).dump();

        if (has_phi) {
            ctx.inputs.push_back({phi_p.string(), io::fnv1a64(io::read_file(phi_p))});
            const json pj = jsonu::parse_file(phi_p);
            rj << ", \"phi\": {\"state\": " << pj.at("state").get<long>()
               << ", \"phi\": " << fmt12(pj.at("phi").get<double>()) << ", \"direction\": "
               << pj.at("direction").dump() << "}";
            rc << "phi," << run_name << "," << pj.at("state").get<long>() << ","
               << fmt12(pj.at("phi").get<double>()) << "\n";
        } else {
            rj << ", \"phi\": null";
        }

        if (has_phibar) {
            ctx.inputs.push_back({phibar_p.string(), io::fnv1a64(io::read_file(phibar_p))});
            const CsvTable t = load_csv(phibar_p);
            if (t.header != std::vector<std::string>{"state", "phi", "weight"})
                throw ConfigError(phibar_p.string() + ": unexpected header");
            double phi_bar = 0.0;
            for (const auto& row : t.rows) {
                if (row.size() != 3) throw ConfigError(phibar_p.string() + ": ragged row");
                phi_bar += std::stod(row[1]) * std::stod(row[2]);
                rc << "phi_bar," << run_name << "," << row[0] << "," << row[1] << "\n";
            }
            rj << ", \"phi_bar\": {\"phi_bar\": " << fmt12(phi_bar)
               << ", \"states\": " << t.rows.size() << "}";
        } else {
            rj << ", \"phi_bar\": null";
        }

        if (has_pci) {
            ctx.inputs.push_back({pci_p.string(), io::fnv1a64(io::read_file(pci_p))});
            const json pj = jsonu::parse_file(pci_p);
            rj << ", \"pci\": {\"pci\": " << fmt12(pj.at("pci").get<double>())
               << ", \"lz\": " << pj.at("lz").get<long>()
               << ", \"length\": " << pj.at("length").get<long>() << "}";
            rc << "pci," << run_name << ",0," << fmt12(pj.at("pci").get<double>()) << "\n";
        } else {
            rj << ", \"pci\": null";
        }

        if (has_trace) {
            ctx.inputs.push_back({trace_p.string(), io::fnv1a64(io::read_file(trace_p))});
            const CsvTable t = load_csv(trace_p);
            if (t.header != std::vector<std::string>{"eval", "loss", "phi", "stop_reason"})
                throw ConfigError(trace_p.string() + ": unexpected header");
            if (t.rows.empty()) throw ConfigError(trace_p.string() + ": no rows");
            for (const auto& row : t.rows) {
                if (row.size() != 4) throw ConfigError(trace_p.string() + ": ragged row");
                rc << "loss," << run_name << "," << row[0] << "," << row[1] << "\n";
            }
            const auto& last = t.rows.back();
            rj << ", \"adaptation\": {\"evals\": " << last[0] << ", \"loss\": " << last[1]
               << ", \"phi\": " << last[2] << ", \"stop_reason\": " << json(last[3]).dump()
               << "}";
        } else {
            rj << ", \"adaptation\": null";
        }
        rj << "}";
    }
    rj << "\n  ]\n}\n";

    ctx.outputs = {"report.json", "report.csv"};
    ctx.write_manifest();
    io::write_file(ctx.out_dir / "report.json", rj.str());
    io::write_file(ctx.out_dir / "report.csv", rc.str());
    return 0;
}

} // namespace

int dispatch_command(const std::string& command, const CliOptions& opts) {
    try {
        RunContext ctx = make_context(command, opts);
        if (command == "simulate") return cmd_simulate(ctx);
        if (command == "phi") return cmd_phi(ctx);
        if (command == "pci") return cmd_pci(ctx);
        if (command == "adapt") return cmd_adapt(ctx);
        if (command == "report") return cmd_report(ctx);
        throw ConfigError("unknown command '" + command + "'");
    } catch (const CapacityError& e) {
        std::cerr << "capacity: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace ncac
