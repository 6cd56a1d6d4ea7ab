// fourbar: dataset generation, expert training, synthesis, and evaluation
// for planar four-bar function generators.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "fourbar/checkpoint.hpp"
#include "fourbar/datagen.hpp"
#include "fourbar/metrics.hpp"
#include "fourbar/moe.hpp"
#include "fourbar/neural.hpp"
#include "fourbar/pointsfile.hpp"
#include "fourbar/svgplot.hpp"

namespace fs = std::filesystem;
using namespace fourbar;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitMissingExpert = 4;

Inversion parse_inversion(const std::string& s) {
    if (s == "+" || s == "plus" || s == "+1" || s == "1") return Inversion::plus;
    if (s == "-" || s == "minus" || s == "-1") return Inversion::minus;
    throw CLI::ValidationError("--inversion", "expected + or -");
}

double now_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

// ---------------------------------------------------------------- gen

struct GenArgs {
    int type = 1;
    std::string inversion = "+";
    int count = 1000;
    int n = 0;
    std::vector<int> n_range;
    double m = 12.0;
    std::uint64_t seed = 0;
    std::string out;
};

int run_gen(const GenArgs& a) {
    GenConfig cfg;
    cfg.type_cfg = {a.type, parse_inversion(a.inversion)};
    cfg.m = a.m;
    cfg.seed = a.seed;
    if (a.n > 0) cfg.n_lo = cfg.n_hi = a.n;
    else if (a.n_range.size() == 2) {
        cfg.n_lo = a.n_range[0];
        cfg.n_hi = a.n_range[1];
    }
    if (cfg.n_lo < 1 || cfg.n_lo > cfg.n_hi || cfg.n_hi > 20) {
        std::fprintf(stderr, "error: point counts must satisfy 1 <= n_lo <= n_hi <= 20\n");
        return kExitUsage;
    }

    SampleStream stream(cfg);
    std::vector<Sample> samples;
    samples.reserve(static_cast<size_t>(a.count));
    const double t0 = now_ms();
    for (int i = 0; i < a.count; ++i) samples.push_back(stream.next());
    const double elapsed = now_ms() - t0;
    write_dataset(a.out, cfg, samples);
    std::printf("wrote %d samples of %s to %s\n", a.count, config_name(cfg.type_cfg).c_str(),
                a.out.c_str());
    std::printf("throughput: %.4f ms/sample\n", elapsed / a.count);
    return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string type = "1"; // 1..8 or "all"
    std::string inversion = "+";
    ExpertHyperParams hyper;
    double m = 12.0;
    std::string ckpt_dir;
    int ckpt_interval = 0;
    bool resume = false;
    std::string report_csv;
    int jobs = 0;
    bool verbose = false;
};

void refresh_manifest(const std::string& dir) {
    std::vector<TypeConfig> present;
    for (const TypeConfig& cfg : all_configs())
        if (fs::exists(fs::path(dir) / expert_filename(cfg))) present.push_back(cfg);
    write_manifest(dir, present);
}

void train_one(const TypeConfig& cfg, const TrainArgs& a, std::uint64_t seed) {
    ExpertHyperParams hyper = a.hyper;
    hyper.seed = seed;

    const std::string path = (fs::path(a.ckpt_dir) / expert_filename(cfg)).string();
    TrainState state;
    if (a.resume && fs::exists(path)) {
        state = load_checkpoint(path);
        if (!(state.model.cfg == cfg)) throw std::runtime_error("checkpoint type mismatch: " + path);
    } else {
        state = init_training(cfg, hyper);
    }

    GenConfig gen;
    gen.type_cfg = cfg;
    gen.m = a.m;
    gen.n_lo = state.model.hyper.n_min;
    gen.n_hi = state.model.hyper.n_max;
    gen.seed = state.model.hyper.seed;
    SampleStream stream(gen);

    TrainOptions opts;
    opts.checkpoint_path = path;
    opts.checkpoint_interval = a.ckpt_interval;
    opts.verbose = a.verbose;
    const int until = std::max(hyper.epochs, state.epoch);
    train_until(state, stream, until, opts);

    if (!a.report_csv.empty()) {
        std::ofstream os(a.report_csv);
        os << "epoch,mean_loss,probe_s_simul,lr\n";
        char buf[128];
        for (size_t e = 0; e < state.report.mean_loss.size(); ++e) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", e, state.report.mean_loss[e],
                          state.report.probe_s_simul[e], state.report.lr[e]);
            os << buf;
        }
    }
}

int run_train(const TrainArgs& a) {
    fs::create_directories(a.ckpt_dir);
    if (a.type == "all") {
        std::vector<TypeConfig> configs = all_configs();
        const int jobs = a.jobs > 0 ? a.jobs
                                    : std::max(1u, std::thread::hardware_concurrency());
        std::mutex mu;
        size_t next = 0;
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        for (int w = 0; w < jobs; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    size_t i;
                    {
                        std::lock_guard<std::mutex> lk(mu);
                        if (next >= configs.size() || failure) return;
                        i = next++;
                    }
                    const TypeConfig cfg = configs[i];
                    try {
                        // distinct deterministic seed per expert
                        train_one(cfg, a, a.hyper.seed + 2ull * cfg.type_id +
                                              (cfg.inversion == Inversion::minus ? 1 : 0));
                        std::lock_guard<std::mutex> lk(mu);
                        std::printf("trained %s\n", config_name(cfg).c_str());
                        std::fflush(stdout);
                    } catch (...) {
                        std::lock_guard<std::mutex> lk(mu);
                        failure = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    } else {
        const TypeConfig cfg{std::stoi(a.type), parse_inversion(a.inversion)};
        train_one(cfg, a, a.hyper.seed);
        std::printf("trained %s\n", config_name(cfg).c_str());
    }
    refresh_manifest(a.ckpt_dir);
    return 0;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    std::string points_path;
    std::string mode = "multi"; // single | multi | relative
    int type = 1;
    std::string inversion = "+";
    int top_k = 3;
    bool keep_same_type = false; // disable the distinct-type filter
    std::string registry;
    int variants = 100;
    std::uint64_t seed = 0;
    std::string plot;
};

void print_row(const char* label, const std::vector<double>& vals) {
    std::printf("%-28s", label);
    for (double v : vals) std::printf(" %12.5f", v);
    std::printf("\n");
}

void print_result_table(const PointSeq& points, const std::vector<SynthesisResult>& results) {
    std::vector<double> in_deg, out_deg;
    for (const auto& p : points) {
        in_deg.push_back(rad_to_deg(p.theta_in));
        out_deg.push_back(rad_to_deg(p.theta_out));
    }
    std::printf("%-28s", "Precision points");
    for (size_t i = 1; i <= points.size(); ++i) std::printf(" %12zu", i);
    std::printf("\n");
    print_row("theta_in (deg)", in_deg);
    print_row("theta_out (deg)", out_deg);

    int rank = 1;
    for (const auto& r : results) {
        std::printf("\nMechanism%d (%s)  S_simul=%.6g\n", rank++, config_name(r.cfg).c_str(), r.s_simul);
        if (!r.dims_valid) {
            std::printf("  prediction violates the linkage validity conditions; not simulated\n");
            continue;
        }
        std::printf("  r_pred=[%.5f, %.5f, %.5f, %.5f]\n", r.dims.r1, r.dims.r2, r.dims.r3, r.dims.r4);
        std::vector<double> pred_deg, err_deg;
        for (size_t i = 0; i < r.eval.pred_out.size(); ++i) {
            pred_deg.push_back(rad_to_deg(r.eval.pred_out[i]));
            err_deg.push_back(r.eval.abs_err_deg[i]);
        }
        print_row("theta_pred_out (deg)", pred_deg);
        print_row("Absolute error (deg)", err_deg);
    }
}

void emit_plot(const std::string& plot_path, const SynthesisResult& best, const PointSeq& points) {
    if (!best.dims_valid) {
        std::fprintf(stderr, "note: best result has invalid dims, skipping plot\n");
        return;
    }
    const DisplacementCurve curve = displacement_curve(best.dims, best.cfg, points);
    char title[160];
    std::snprintf(title, sizeof title, "%s  r=[%.3f, %.3f, %.3f, %.3f]",
                  config_name(best.cfg).c_str(), best.dims.r1, best.dims.r2, best.dims.r3,
                  best.dims.r4);
    write_displacement_svg(plot_path, curve, title);
    write_curve_csv(plot_path + ".csv", curve);
    std::printf("\nplot written to %s (curve data: %s.csv)\n", plot_path.c_str(), plot_path.c_str());
}

int run_synth(const SynthArgs& a) {
    const PointsFile pf = read_points_file(a.points_path);
    const ExpertRegistry reg = ExpertRegistry::load(a.registry);

    if (a.mode == "relative") {
        if (pf.mode != PointsFile::Mode::relative) {
            std::fprintf(stderr, "error: relative mode needs a d_theta_* points file\n");
            return kExitData;
        }
        Rng rng(a.seed);
        const RelativeSynthesis rel = synthesize_relative(reg, pf.points, a.variants, rng);
        std::printf("expanded to %d variants, %d candidate predictions\n", rel.variants,
                    rel.candidates);

        // Top results over distinct type names, like the multi-type tables.
        std::vector<SynthesisResult> top;
        bool seen[9] = {};
        for (const auto& r : rel.ranked) {
            if (a.top_k > 0 && static_cast<int>(top.size()) >= a.top_k) break;
            if (!a.keep_same_type && seen[r.cfg.type_id]) continue;
            seen[r.cfg.type_id] = true;
            top.push_back(r);
        }

        std::vector<double> din, dout;
        for (const auto& p : pf.points) {
            din.push_back(rad_to_deg(p.theta_in));
            dout.push_back(rad_to_deg(p.theta_out));
        }
        print_row("d_theta_in (deg)", din);
        print_row("d_theta_out (deg)", dout);
        int rank = 1;
        for (const auto& r : top) {
            std::printf("\nMechanism%d (%s)  S_simul=%.6g\n", rank++, config_name(r.cfg).c_str(),
                        r.s_simul);
            std::printf("  initial angles: theta_in=%0.5f deg, theta_out=%0.5f deg\n",
                        rad_to_deg(r.initial_angles->first), rad_to_deg(r.initial_angles->second));
            if (!r.dims_valid) {
                std::printf("  prediction violates the linkage validity conditions; not simulated\n");
                continue;
            }
            std::printf("  r_pred=[%.5f, %.5f, %.5f, %.5f]\n", r.dims.r1, r.dims.r2, r.dims.r3,
                        r.dims.r4);
            std::vector<double> abs_in, abs_out, pred_deg, err_deg;
            for (size_t i = 0; i < pf.points.size(); ++i) {
                abs_in.push_back(rad_to_deg(r.initial_angles->first + pf.points[i].theta_in));
                abs_out.push_back(rad_to_deg(r.initial_angles->second + pf.points[i].theta_out));
                pred_deg.push_back(rad_to_deg(r.eval.pred_out[i]));
                err_deg.push_back(r.eval.abs_err_deg[i]);
            }
            print_row("theta_precision_in (deg)", abs_in);
            print_row("theta_precision_out (deg)", abs_out);
            print_row("theta_pred_out (deg)", pred_deg);
            print_row("Absolute error (deg)", err_deg);
        }
        if (!a.plot.empty() && !top.empty()) {
            PointSeq abs_points;
            for (const auto& p : pf.points)
                abs_points.push_back({top[0].initial_angles->first + p.theta_in,
                                      top[0].initial_angles->second + p.theta_out});
            emit_plot(a.plot, top[0], abs_points);
        }
        return 0;
    }

    if (pf.mode != PointsFile::Mode::absolute) {
        std::fprintf(stderr, "error: %s mode needs an absolute points file\n", a.mode.c_str());
        return kExitData;
    }

    std::vector<SynthesisResult> results;
    if (a.mode == "single") {
        results.push_back(synthesize_single(reg, {a.type, parse_inversion(a.inversion)}, pf.points));
    } else if (a.mode == "multi") {
        results = synthesize_multi(reg, pf.points, a.top_k, !a.keep_same_type);
    } else {
        std::fprintf(stderr, "error: unknown mode '%s'\n", a.mode.c_str());
        return kExitUsage;
    }
    print_result_table(pf.points, results);
    if (!a.plot.empty() && !results.empty()) emit_plot(a.plot, results[0], pf.points);
    return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string registry;
    std::string type = "all";
    std::string inversion = "+";
    int samples = 512;
    std::uint64_t seed = 0;
    double m = 12.0;
};

int run_eval(const EvalArgs& a) {
    const ExpertRegistry reg = ExpertRegistry::load(a.registry);
    std::vector<TypeConfig> configs;
    if (a.type == "all") configs = all_configs();
    else configs.push_back({std::stoi(a.type), parse_inversion(a.inversion)});

    std::printf("%-22s %14s %14s %8s\n", "Mechanism Type", "S_simul(pred)", "S_simul(truth)",
                "invalid");
    for (const TypeConfig& cfg : configs) {
        const ExpertModel& expert = reg.get(cfg);
        GenConfig gen;
        gen.type_cfg = cfg;
        gen.m = a.m;
        gen.seed = a.seed ^ (0x5eedull + 31ull * cfg.type_id +
                             (cfg.inversion == Inversion::minus ? 17 : 0));
        SampleStream stream(gen);
        double sum_pred = 0, sum_truth = 0;
        int invalid = 0;
        for (int i = 0; i < a.samples; ++i) {
            const Sample s = stream.next();
            const LinkageDims r = predict(expert, s.points);
            if (r.is_valid()) sum_pred += simulation_metric(r, cfg, s.points).s_simul;
            else {
                sum_pred += 2.0;
                ++invalid;
            }
            sum_truth += simulation_metric(s.dims, cfg, s.points).s_simul;
        }
        std::printf("%-22s %14.6f %14.3e %8d\n", config_name(cfg).c_str(), sum_pred / a.samples,
                    sum_truth / a.samples, invalid);
        std::fflush(stdout);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"data-driven dimensional synthesis of planar four-bar function generators"};
    app.require_subcommand(1);

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "generate a type-specified dataset");
    gen->add_option("--type", ga.type, "linkage type 1..8")->check(CLI::Range(1, 8))->required();
    gen->add_option("--inversion", ga.inversion, "geometric inversion + or -");
    gen->add_option("--count", ga.count, "number of samples")->check(CLI::PositiveNumber);
    gen->add_option("--n", ga.n, "fixed points per sample");
    gen->add_option("--n-range", ga.n_range, "points per sample range: lo hi")->expected(2);
    gen->add_option("--m", ga.m, "upper bound for |T_j| draws");
    gen->add_option("--seed", ga.seed, "RNG seed");
    gen->add_option("--out", ga.out, "output dataset path")->required();

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "train one expert (or --type all)");
    train->add_option("--type", ta.type, "linkage type 1..8, or 'all'")->required();
    train->add_option("--inversion", ta.inversion, "geometric inversion + or -");
    train->add_option("--epochs", ta.hyper.epochs, "training epochs");
    train->add_option("--samples-per-epoch", ta.hyper.samples_per_epoch, "samples per epoch");
    train->add_option("--batch", ta.hyper.batch_size, "minibatch size");
    train->add_option("--hidden", ta.hyper.hidden, "LSTM hidden width");
    train->add_option("--layers", ta.hyper.layers, "stacked LSTM layers");
    train->add_option("--dropout", ta.hyper.dropout_p, "dropout probability between layers");
    train->add_option("--lr", ta.hyper.lr, "initial learning rate");
    train->add_option("--weight-decay", ta.hyper.weight_decay, "coupled L2 weight decay");
    train->add_option("--gamma", ta.hyper.gamma, "LR decay factor at milestones");
    train->add_option("--milestones", ta.hyper.schedule_milestones, "LR schedule epoch milestones");
    train->add_option("--n-min", ta.hyper.n_min, "min points per training sequence");
    train->add_option("--n-max", ta.hyper.n_max, "max points per training sequence");
    train->add_option("--probe-size", ta.hyper.probe_size, "held-out probe sequences per epoch");
    train->add_option("--seed", ta.hyper.seed, "base RNG seed");
    train->add_option("--m", ta.m, "dataset |T_j| upper bound");
    train->add_option("--ckpt-dir", ta.ckpt_dir, "checkpoint directory")->required();
    train->add_option("--ckpt-interval", ta.ckpt_interval, "checkpoint every K epochs");
    train->add_flag("--resume", ta.resume, "continue from an existing checkpoint");
    train->add_option("--report", ta.report_csv, "write per-epoch training report CSV");
    train->add_option("--jobs", ta.jobs, "worker threads for --type all");
    train->add_flag("--verbose", ta.verbose, "per-epoch progress lines");

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "synthesize linkages for target precision points");
    synth->add_option("--points", sa.points_path, "precision points CSV")->required();
    synth->add_option("--mode", sa.mode, "single | multi | relative");
    synth->add_option("--type", sa.type, "linkage type (single mode)")->check(CLI::Range(1, 8));
    synth->add_option("--inversion", sa.inversion, "geometric inversion (single mode)");
    synth->add_option("--top-k", sa.top_k, "results to report");
    synth->add_flag("--all-inversions", sa.keep_same_type,
                    "rank without collapsing to distinct type names");
    synth->add_option("--registry", sa.registry, "expert registry directory")->required();
    synth->add_option("--variants", sa.variants, "initial-pose variants (relative mode)");
    synth->add_option("--seed", sa.seed, "RNG seed (relative mode)");
    synth->add_option("--plot", sa.plot, "write displacement SVG for the top result");

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "held-out simulation-metric table per expert");
    eval->add_option("--registry", ea.registry, "expert registry directory")->required();
    eval->add_option("--type", ea.type, "linkage type 1..8 or 'all'");
    eval->add_option("--inversion", ea.inversion, "geometric inversion + or -");
    eval->add_option("--samples", ea.samples, "held-out samples per configuration");
    eval->add_option("--seed", ea.seed, "RNG seed");
    eval->add_option("--m", ea.m, "dataset |T_j| upper bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (gen->parsed()) return run_gen(ga);
        if (train->parsed()) return run_train(ta);
        if (synth->parsed()) return run_synth(sa);
        if (eval->parsed()) return run_eval(ea);
    } catch (const MissingExpert& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitMissingExpert;
    } catch (const PointsParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const GenerationTimeout& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return 0;
}
