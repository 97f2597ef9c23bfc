#include "pac/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "pac/action_selection.hpp"
#include "pac/actual_causation.hpp"
#include "pac/discovery.hpp"
#include "pac/error.hpp"
#include "pac/format.hpp"
#include "pac/pipeline.hpp"
#include "pac/pouring_world.hpp"
#include "pac/serialize.hpp"

namespace pac {

namespace {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::Usage:
        case ErrorCode::InvalidConfig:
        case ErrorCode::InvalidIntervention:
        case ErrorCode::PathInvalid:
        case ErrorCode::TooManyPaths:
        case ErrorCode::OutcomeNotBinary:
        case ErrorCode::TooManyMediators:
        case ErrorCode::GridMismatch:
            return kExitUsage;
        case ErrorCode::NonFiniteLoss:
        case ErrorCode::NonFiniteGradient:
        case ErrorCode::Diverged:
        case ErrorCode::SingularCovariance:
            return kExitNumeric;
        default:
            return kExitData;
    }
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::Usage, what + " must be a non-negative integer, got '" + text + "'");
    }
    return v;
}

double parse_number(const std::string& text, const std::string& what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::Usage, what + ": '" + text + "' is not a number");
    }
    return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::stringstream ss(text);
    while (std::getline(ss, cur, sep)) {
        if (!cur.empty()) parts.push_back(cur);
    }
    return parts;
}

// Flags given on the command line win; the JSON config fills in the rest.
std::pair<std::vector<std::string>, std::optional<std::string>> merge_config(const std::vector<std::string>& args) {
    std::vector<std::string> kept;
    std::optional<std::string> config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw Error(ErrorCode::Usage, "--config needs a file");
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            kept.push_back(args[i]);
        }
    }
    if (!config_path) return {kept, config_path};

    Json config;
    try {
        config = read_json_file(*config_path);
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
    if (!config.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
    auto given = [&](const std::string& flag) {
        return std::any_of(kept.begin(), kept.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    auto scalar = [](const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    for (const auto& [key, value] : config.items()) {
        const std::string flag = "--" + key;
        if (given(flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) kept.push_back(flag);
        } else if (value.is_array()) {
            for (const auto& v : value) {
                kept.push_back(flag);
                kept.push_back(scalar(v));
            }
        } else if (value.is_null() || value.is_object()) {
            throw Error(ErrorCode::InvalidConfig, "config key '" + key + "' must be a scalar or list");
        } else {
            kept.push_back(flag);
            kept.push_back(scalar(value));
        }
    }
    return {kept, config_path};
}

std::uint64_t resolve_seed(const std::optional<std::string>& flag) {
    if (flag) return parse_u64(*flag, "--seed");
    if (const char* env = std::getenv("PAC_SEED"); env != nullptr && *env != '\0') return parse_u64(env, "PAC_SEED");
    return 0;
}

class Manifest {
public:
    Manifest(std::string command, const CLI::App& sub, std::optional<std::string> config_path)
        : command_(std::move(command)), started_(utc_now()) {
        for (const CLI::Option* opt : sub.get_options()) {
            const std::string name = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
            if (name == "help" || name.empty()) continue;
            if (opt->count() > 0) {
                const auto& res = opt->results();
                config_[name] = res.size() == 1 ? Json(res.front()) : Json(res);
            } else {
                config_[name] = opt->get_default_str();
            }
        }
        if (config_path) config_["config"] = *config_path;
    }

    void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
    void input(const std::string& path) { inputs_.push_back(path); }
    void output(const std::string& path) { outputs_.push_back(path); }
    void extra(const std::string& key, Json value) { extra_[key] = std::move(value); }

    void write(const std::string& path) {
        outputs_.push_back(path);
        Json j{{"command", command_},     {"tool_version", kToolVersion}, {"config", config_},
               {"seeds", seeds_},         {"inputs", inputs_},            {"outputs", outputs_},
               {"started_at", started_}, {"finished_at", utc_now()}};
        if (!extra_.empty()) j["results"] = extra_;
        write_text_file(path, j.dump(2) + "\n");
    }

private:
    std::string command_;
    std::string started_;
    Json config_ = Json::object();
    Json seeds_ = Json::object();
    Json extra_ = Json::object();
    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create directory '" + dir + "': " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string resolve_node(const CausalGraph& graph, const std::string& key) {
    for (const auto& name : graph.node_names()) {
        if (lower(name) == lower(key)) return name;
    }
    throw Error(ErrorCode::Usage, "unknown variable '" + key + "'");
}

// "k=v,k=v" (or repeated flags) into node assignments.
InterventionSet parse_assignments(const std::vector<std::string>& items, const CausalGraph& graph) {
    InterventionSet out;
    for (const auto& item : items) {
        for (const auto& part : split(item, ',')) {
            const auto eq = part.find('=');
            if (eq == std::string::npos) throw Error(ErrorCode::Usage, "expected key=value, got '" + part + "'");
            const std::string node = resolve_node(graph, part.substr(0, eq));
            if (!out.emplace(node, parse_number(part.substr(eq + 1), node)).second) {
                throw Error(ErrorCode::Usage, "'" + node + "' assigned twice");
            }
        }
    }
    return out;
}

WorldConfig world_config(const std::optional<std::string>& path) {
    WorldConfig c;
    if (!path) return c;
    const Json j = read_json_file(*path);
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "world config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!value.is_number()) throw Error(ErrorCode::InvalidConfig, "world config '" + key + "' must be a number");
        const double v = value.get<double>();
        if (key == "sigma_pack") {
            c.sigma_pack = v;
        } else if (key == "overflow_width") {
            c.overflow_width = v;
        } else if (key == "rim_slope") {
            c.rim_slope = v;
        } else if (key == "rim_offset") {
            c.rim_offset = v;
        } else if (key == "rim_width") {
            c.rim_width = v;
        } else {
            throw Error(ErrorCode::InvalidConfig, "unknown world config key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

TrainedModel load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

Criterion parse_criterion(const std::string& s) {
    if (s == "closest") return Criterion::ClosestToActual;
    if (s == "lowest") return Criterion::LowestProbability;
    throw Error(ErrorCode::Usage, "criterion must be 'closest' or 'lowest'");
}

std::string replace_extension(const std::string& path, const std::string& ext) {
    return fs::path(path).replace_extension(ext).string();
}

struct Common {
    std::optional<std::string> seed;
    std::string out;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "Random seed (default: $PAC_SEED, else 0)");
    sub->add_option("--out", c.out, "Output path")->required();
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Causal pouring analysis: simulate, discover, train, query and evaluate."};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.footer("Every subcommand accepts --config FILE.json whose keys mirror the long flags; flags take precedence.");

    // simulate
    Common sim_c;
    std::size_t sim_n = 6000;
    std::optional<std::string> sim_world;
    auto* sim = app.add_subcommand("simulate", "Generate pouring trials from the synthetic world");
    sim->add_option("--n", sim_n, "Number of trials")->required();
    sim->add_option("--world", sim_world, "World coefficients JSON");
    add_common(sim, sim_c);

    // discover
    Common dis_c;
    std::string dis_data;
    std::size_t dis_boot = 1000;
    double dis_alpha = 0.05;
    double dis_threshold = 0.5;
    std::string dis_ci = "fisher-z";
    std::optional<std::string> dis_tiers;
    bool dis_raw = false;
    auto* dis = app.add_subcommand("discover", "Bootstrap PC structure learning");
    dis->add_option("--data", dis_data, "Trial data (CSV or JSON lines)")->required();
    dis->add_option("--boot", dis_boot, "Number of bootstrap resamples");
    dis->add_option("--alpha", dis_alpha, "CI test significance level");
    dis->add_option("--threshold", dis_threshold, "Edge stability threshold");
    dis->add_option("--ci", dis_ci, "fisher-z or dg-lrt");
    dis->add_option("--tiers", dis_tiers, "Tiers JSON (list of lists)");
    dis->add_flag("--raw-scale", dis_raw, "Test ratio columns without the log transform");
    add_common(dis, dis_c);

    // train
    Common tr_c;
    std::string tr_data;
    std::optional<std::string> tr_graph;
    TrainConfig tr_cfg;
    std::string tr_hidden = "16,16";
    auto* tr = app.add_subcommand("train", "Fit one density estimator per node");
    tr->add_option("--data", tr_data, "Trial data (CSV or JSON lines)")->required();
    tr->add_option("--graph", tr_graph, "Graph JSON (default: the pouring graph)");
    tr->add_option("--lr", tr_cfg.learning_rate, "Learning rate");
    tr->add_option("--epochs", tr_cfg.epochs, "Training epochs");
    tr->add_option("--batch", tr_cfg.batch_size, "Minibatch size");
    tr->add_option("--hidden", tr_hidden, "Hidden layer widths, comma separated");
    add_common(tr, tr_c);

    // do-curve
    Common dc_c;
    std::string dc_model;
    std::string dc_outcome = kS;
    std::string dc_sweep;
    std::vector<std::string> dc_fix;
    std::size_t dc_samples = kDefaultMonteCarloSamples;
    auto* dc = app.add_subcommand("do-curve", "Interventional probability over a sweep");
    dc->add_option("--model", dc_model, "Model bundle JSON")->required();
    dc->add_option("--outcome", dc_outcome, "Binary outcome node");
    dc->add_option("--sweep", dc_sweep, "var:lo:hi:n")->required();
    dc->add_option("--fix", dc_fix, "Additional interventions k=v (repeatable)");
    dc->add_option("--samples", dc_samples, "Monte Carlo samples per point");
    add_common(dc, dc_c);

    // ac and select share the trial/cause surface
    Common ac_c;
    std::string ac_model;
    std::string ac_trial;
    std::string ac_cause;
    std::string ac_outcome = kS;
    std::optional<std::size_t> ac_path;
    std::size_t ac_points = kDefaultGridPoints;
    std::size_t ac_samples = kDefaultMonteCarloSamples;
    auto* ac = app.add_subcommand("ac", "Probability-raising region for one observed trial");
    ac->add_option("--model", ac_model, "Model bundle JSON")->required();
    ac->add_option("--trial", ac_trial, "Observed values rc=..,fu=..,rd=..,rv=..,s=..")->required();
    ac->add_option("--cause", ac_cause, "Cause variable")->required();
    ac->add_option("--outcome", ac_outcome, "Binary outcome node");
    ac->add_option("--path", ac_path, "Index into the directed paths from cause to outcome (default: longest)");
    ac->add_option("--grid-points", ac_points, "Contrastive grid size");
    ac->add_option("--samples", ac_samples, "Monte Carlo samples per estimate");
    add_common(ac, ac_c);

    Common sel_c;
    std::string sel_model;
    std::string sel_trial;
    std::string sel_cause;
    std::string sel_id = "0";
    double sel_threshold = 0.1;
    std::string sel_criterion = "closest";
    std::size_t sel_points = kDefaultGridPoints;
    std::size_t sel_samples = kDefaultMonteCarloSamples;
    auto* sel = app.add_subcommand("select", "Pick an alternative value for one variable of a trial");
    sel->add_option("--model", sel_model, "Model bundle JSON")->required();
    sel->add_option("--trial", sel_trial, "Observed values rc=..,fu=..,rd=..,rv=..,s=..")->required();
    sel->add_option("--cause", sel_cause, "Variable to change")->required();
    sel->add_option("--trial-id", sel_id, "Identifier echoed in the result");
    sel->add_option("--threshold", sel_threshold, "Target spillage probability");
    sel->add_option("--criterion", sel_criterion, "closest or lowest");
    sel->add_option("--grid-points", sel_points, "Contrastive grid size");
    sel->add_option("--samples", sel_samples, "Monte Carlo samples per estimate");
    add_common(sel, sel_c);

    // evaluate
    Common ev_c;
    std::string ev_model;
    std::string ev_data;
    EvaluationConfig ev_cfg;
    std::string ev_vars = "RD,FU,RC";
    std::string ev_criterion = "closest";
    std::size_t ev_hist = 100;
    std::optional<std::string> ev_world;
    auto* ev = app.add_subcommand("evaluate", "Alternative coverage and replay success on test trials");
    ev->add_option("--model", ev_model, "Model bundle JSON")->required();
    ev->add_option("--test-data", ev_data, "Held-out trials")->required();
    ev->add_option("--threshold", ev_cfg.policy.threshold, "Target spillage probability");
    ev->add_option("--criterion", ev_criterion, "closest or lowest");
    ev->add_option("--replications", ev_cfg.replications, "Ground-truth replays per alternative");
    ev->add_option("--samples", ev_cfg.grid.n_samples, "Monte Carlo samples per estimate");
    ev->add_option("--grid-points", ev_cfg.grid.points, "Contrastive grid size");
    ev->add_option("--variables", ev_vars, "Variables to correct, comma separated");
    ev->add_option("--histogram-trials", ev_hist, "Spillage trials in the replication histogram");
    ev->add_option("--world", ev_world, "World coefficients JSON");
    add_common(ev, ev_c);

    try {
        auto [args, config_path] = merge_config(raw_args);
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);

        if (*sim) {
            if (sim_n < 1) throw Error(ErrorCode::Usage, "--n must be at least 1");
            const std::uint64_t seed = resolve_seed(sim_c.seed);
            Manifest m("simulate", *sim, config_path);
            m.seed("seed", seed);
            const PouringWorld world(world_config(sim_world));
            if (sim_world) m.input(*sim_world);
            write_trials_file(sim_c.out, world.generate_dataset(sim_n, seed));
            m.output(sim_c.out);
            m.write(sim_c.out + ".manifest.json");
            out << "wrote " << sim_n << " trials to " << sim_c.out << "\n";
        } else if (*dis) {
            const std::uint64_t seed = resolve_seed(dis_c.seed);
            CiTest test = pouring_ci_test();
            test.alpha = dis_alpha;
            if (dis_ci == "dg-lrt") {
                test.kind = CiKind::DegenerateGaussianLrt;
            } else if (dis_ci != "fisher-z") {
                throw Error(ErrorCode::Usage, "--ci must be fisher-z or dg-lrt");
            }
            if (dis_raw) test.log_columns.clear();
            test.validate();
            if (!(dis_threshold >= 0.0 && dis_threshold < 1.0)) {
                throw Error(ErrorCode::Usage, "--threshold must lie in [0,1)");
            }
            Tiers tiers = pouring_tiers();
            Manifest m("discover", *dis, config_path);
            m.seed("seed", seed);
            if (dis_tiers) {
                try {
                    tiers = tiers_from_json(read_json_file(*dis_tiers));
                } catch (const Error& e) {
                    throw Error(ErrorCode::InvalidConfig, std::string("bad tiers file: ") + e.what());
                }
                m.input(*dis_tiers);
            }
            if (dis_boot < 100) {
                err << "warning: " << dis_boot << " bootstrap resample(s); edge frequencies will be unstable\n";
            }
            const Dataset frame = node_frame(read_trials_file(dis_data));
            m.input(dis_data);
            const EdgeFrequencyTable table = bootstrap(frame, dis_boot, test, tiers, seed);
            ensure_dir(dis_c.out);
            std::ostringstream csv;
            write_edge_table(csv, table);
            const std::string table_path = join_path(dis_c.out, "edge_frequencies.csv");
            write_text_file(table_path, csv.str());
            m.output(table_path);
            const std::string tiers_path = join_path(dis_c.out, "tiers.json");
            write_text_file(tiers_path, tiers_to_json(tiers).dump() + "\n");
            m.output(tiers_path);
            const CausalGraph graph = stable_graph(table, pouring_nodes(), tiers, dis_threshold);
            const std::string graph_path = join_path(dis_c.out, "graph.json");
            write_text_file(graph_path, graph_to_json(graph).dump(2) + "\n");
            m.output(graph_path);
            m.write(join_path(dis_c.out, "manifest.json"));
            out << "stable graph with " << graph.edges().size() << " edges written to " << graph_path << "\n";
        } else if (*tr) {
            tr_cfg.seed = resolve_seed(tr_c.seed);
            tr_cfg.hidden.clear();
            for (const auto& h : split(tr_hidden, ',')) tr_cfg.hidden.push_back(parse_u64(h, "--hidden"));
            tr_cfg.validate();
            Manifest m("train", *tr, config_path);
            m.seed("seed", tr_cfg.seed);
            CausalGraph graph = pouring_graph();
            if (tr_graph) {
                graph = graph_from_json(read_json_file(*tr_graph));
                m.input(*tr_graph);
            }
            const Dataset frame = node_frame(read_trials_file(tr_data));
            m.input(tr_data);
            std::map<std::string, FitReport> reports;
            const TrainedModel model = train_model(frame, graph, tr_cfg, &reports);
            ensure_dir(join_path(tr_c.out, "mechanisms"));
            Json nll = Json::object();
            for (const Node& n : graph.nodes()) {
                const std::string p = join_path(join_path(tr_c.out, "mechanisms"), n.name + ".json");
                write_text_file(p, mechanism_to_json(model.mechanism(n.name)).dump() + "\n");
                m.output(p);
                const FitReport& r = reports.at(n.name);
                nll[n.name] = Json{{"initial", r.initial_nll}, {"final", r.final_nll}, {"best_epoch", r.best_epoch}};
            }
            const std::string bundle = join_path(tr_c.out, "model.json");
            write_text_file(bundle, model_to_json(model).dump() + "\n");
            m.output(bundle);
            m.extra("nll", nll);
            m.write(join_path(tr_c.out, "manifest.json"));
            out << "trained " << graph.nodes().size() << " mechanisms into " << bundle << "\n";
        } else if (*dc) {
            const std::uint64_t seed = resolve_seed(dc_c.seed);
            const TrainedModel model = load_model(dc_model);
            const auto parts = split(dc_sweep, ':');
            if (parts.size() != 4) throw Error(ErrorCode::Usage, "--sweep must be var:lo:hi:n");
            const std::string node = resolve_node(model.graph(), parts[0]);
            const double lo = parse_number(parts[1], "--sweep lo");
            const double hi = parse_number(parts[2], "--sweep hi");
            const std::size_t n = parse_u64(parts[3], "--sweep n");
            if (n < 1 || hi < lo) throw Error(ErrorCode::Usage, "--sweep needs n >= 1 and lo <= hi");
            std::vector<double> grid(n, lo);
            for (std::size_t i = 1; i < n; ++i) grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
            const InterventionSet context = parse_assignments(dc_fix, model.graph());
            const auto curve = do_curve(model, resolve_node(model.graph(), dc_outcome), node, grid, context,
                                        dc_samples, seed);
            std::ostringstream csv;
            write_curve_csv(csv, curve);
            write_text_file(dc_c.out, csv.str());
            Manifest m("do-curve", *dc, config_path);
            m.seed("seed", seed);
            m.input(dc_model);
            m.output(dc_c.out);
            m.write(dc_c.out + ".manifest.json");
            out << "wrote " << curve.size() << " points to " << dc_c.out << "\n";
        } else if (*ac) {
            const std::uint64_t seed = resolve_seed(ac_c.seed);
            const TrainedModel model = load_model(ac_model);
            AcQuery q;
            q.cause = resolve_node(model.graph(), ac_cause);
            q.outcome = resolve_node(model.graph(), ac_outcome);
            if (q.cause == q.outcome) throw Error(ErrorCode::Usage, "--cause must differ from the outcome");
            q.context = parse_assignments({ac_trial}, model.graph());
            if (ac_path) {
                const auto paths = model.graph().directed_paths(q.cause, q.outcome);
                if (*ac_path >= paths.size()) {
                    throw Error(ErrorCode::Usage, "--path index out of range (" + std::to_string(paths.size()) + " paths)");
                }
                q.path = paths[*ac_path];
            } else {
                q.path = designated_path(model.graph(), q.cause, q.outcome);
            }
            q.grid = default_grid(model.graph(), q.cause, ac_points);
            q.n_samples = ac_samples;
            q.seed = seed;
            const AcRegion region = raising_region(model, q);
            write_text_file(ac_c.out, region_to_json(region).dump(2) + "\n");
            std::ostringstream csv;
            write_region_csv(csv, region);
            const std::string csv_path = replace_extension(ac_c.out, ".csv");
            write_text_file(csv_path, csv.str());
            Manifest m("ac", *ac, config_path);
            m.seed("seed", seed);
            m.input(ac_model);
            m.output(ac_c.out);
            m.output(csv_path);
            m.write(ac_c.out + ".manifest.json");
            out << "raising holds at " << std::count(region.raising.begin(), region.raising.end(), true) << " of "
                << region.grid.size() << " grid points\n";
        } else if (*sel) {
            const std::uint64_t seed = resolve_seed(sel_c.seed);
            const TrainedModel model = load_model(sel_model);
            SelectionPolicy policy{sel_threshold, parse_criterion(sel_criterion)};
            policy.validate();
            const std::string cause = resolve_node(model.graph(), sel_cause);
            if (cause == kS) throw Error(ErrorCode::Usage, "--cause must differ from the outcome");
            const InterventionSet observed = parse_assignments({sel_trial}, model.graph());
            const auto picked = select_for_trial(model, observed, cause, kS, policy, GridConfig{sel_points, sel_samples}, seed);
            const Json j = selection_to_json(sel_id, cause, picked.result, policy.threshold);
            write_text_file(sel_c.out, j.dump(2) + "\n");
            Manifest m("select", *sel, config_path);
            m.seed("seed", seed);
            m.input(sel_model);
            m.output(sel_c.out);
            m.write(sel_c.out + ".manifest.json");
            out << j.dump() << "\n";
        } else if (*ev) {
            ev_cfg.seed = resolve_seed(ev_c.seed);
            ev_cfg.policy.criterion = parse_criterion(ev_criterion);
            ev_cfg.variables.clear();
            const TrainedModel model = load_model(ev_model);
            for (const auto& v : split(ev_vars, ',')) ev_cfg.variables.push_back(resolve_node(model.graph(), v));
            const PouringWorld world(world_config(ev_world));
            const std::vector<Trial> trials = read_trials_file(ev_data);
            const EvaluationReport report = evaluate(model, world, trials, ev_cfg);

            ensure_dir(ev_c.out);
            Manifest m("evaluate", *ev, config_path);
            m.seed("seed", ev_cfg.seed);
            m.input(ev_model);
            m.input(ev_data);
            if (ev_world) m.input(*ev_world);

            const ConfusionMatrix& cm = report.confusion;
            Json vars = Json::array();
            for (const auto& s : report.variables) {
                vars.push_back(Json{{"variable", s.variable},
                                    {"spillage_trials", s.analyzed},
                                    {"alternatives", s.alternatives},
                                    {"no_change", s.no_change},
                                    {"none", s.none},
                                    {"coverage", s.coverage()},
                                    {"replications", s.replications},
                                    {"successes", s.successes},
                                    {"success_rate", s.success_rate()},
                                    {"min_trial_success_rate", s.min_trial_success_rate},
                                    {"trials_above_chance", s.trials_above_chance}});
            }
            const Json summary{{"test_trials", report.n_trials},
                               {"spillage_trials", report.n_spillage},
                               {"threshold", ev_cfg.policy.threshold},
                               {"prediction",
                                {{"cutoff", ev_cfg.cutoff},
                                 {"true_positive", cm.true_positive},
                                 {"false_negative", cm.false_negative},
                                 {"true_negative", cm.true_negative},
                                 {"false_positive", cm.false_positive},
                                 {"true_positive_rate", cm.true_positive_rate()},
                                 {"true_negative_rate", cm.true_negative_rate()}}},
                               {"variables", vars}};
            const std::string report_path = join_path(ev_c.out, "report.json");
            write_text_file(report_path, summary.dump(2) + "\n");
            m.output(report_path);

            std::ostringstream sel_csv;
            sel_csv << "trial_id,variable,result,value,predicted_probability,successes,replications\n";
            std::ostringstream hist_csv;
            hist_csv << "trial_id,variable,value,successes,replications,success_rate\n";
            std::map<std::string, std::size_t> hist_count;
            for (const auto& o : report.outcomes) {
                sel_csv << o.trial_index << ',' << o.variable << ',' << selection_label(o.result) << ',';
                if (const auto* alt = std::get_if<Alternative>(&o.result)) {
                    sel_csv << format_double(alt->value) << ',' << format_double(alt->predicted_probability);
                    if (hist_count[o.variable]++ < ev_hist) {
                        hist_csv << o.trial_index << ',' << o.variable << ',' << format_double(alt->value) << ','
                                 << o.successes << ',' << o.replications << ','
                                 << format_double(static_cast<double>(o.successes) / static_cast<double>(o.replications))
                                 << '\n';
                    }
                } else if (const auto* keep = std::get_if<NoChangeNeeded>(&o.result)) {
                    sel_csv << ',' << format_double(keep->reference_probability);
                } else {
                    sel_csv << ',';
                }
                sel_csv << ',' << o.successes << ',' << o.replications << '\n';
            }
            const std::string sel_path = join_path(ev_c.out, "selections.csv");
            write_text_file(sel_path, sel_csv.str());
            m.output(sel_path);
            const std::string hist_path = join_path(ev_c.out, "replication_histogram.csv");
            write_text_file(hist_path, hist_csv.str());
            m.output(hist_path);
            m.write(join_path(ev_c.out, "manifest.json"));
            out << summary.dump(2) << "\n";
        }
        return kExitOk;
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
}

}  // namespace pac
