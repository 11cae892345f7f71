#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scotti/config.hpp"
#include "scotti/equilibrium.hpp"
#include "scotti/error.hpp"
#include "scotti/flops.hpp"
#include "scotti/gradcheck.hpp"
#include "scotti/harness.hpp"
#include "scotti/rng.hpp"

namespace {

int cmd_train(const std::string& config_path) {
    const scotti::TrainConfig cfg = scotti::load_config(config_path);
    const scotti::RunReport rep = scotti::run_training(cfg);
    scotti::emit_metrics(rep, cfg.output_dir);
    std::printf("mode=%s  epochs=%d  final_train_acc=%.4f  final_test_acc=%.4f\n",
                scotti::mode_name(cfg.mode).c_str(), cfg.epochs, rep.final_train_acc,
                rep.final_test_acc);
    std::printf("flops_saved=%.2f%%  outputs in %s\n", rep.flops_saved, cfg.output_dir.c_str());
    return 0;
}

int cmd_report(const std::string& run_dir) {
    const scotti::RunReport rep = scotti::load_report(run_dir);
    std::printf("mode: %s\n", scotti::mode_name(rep.config.mode).c_str());
    std::printf("dataset: %s\n", rep.config.dataset.c_str());
    std::printf("model: %s\n", rep.config.model.c_str());
    std::printf("epochs: %zu\n", rep.loss.size());
    std::printf("final train acc: %.4f\n", rep.final_train_acc);
    std::printf("final test acc: %.4f\n", rep.final_test_acc);
    std::printf("flops saved: %.2f%%\n", rep.flops_saved);
    std::printf("final alpha: %.6g  final epsilon: %.6g\n", rep.alpha.back(), rep.epsilon.back());
    int peak = 0;
    for (int f : rep.frozen_count) peak = std::max(peak, f);
    std::printf("peak frozen neurons: %d\n", peak);
    return 0;
}

int cmd_compare(const std::vector<std::string>& run_dirs, const std::string& csv_out) {
    std::vector<scotti::RunReport> reports;
    reports.reserve(run_dirs.size());
    for (const std::string& dir : run_dirs) reports.push_back(scotti::load_report(dir));
    const scotti::Comparison cmp = scotti::compare_runs(reports);
    std::fputs(cmp.text.c_str(), stdout);
    if (!csv_out.empty()) {
        std::ofstream out(csv_out, std::ios::binary);
        if (!out) throw scotti::io_error("cannot write '" + csv_out + "'");
        out << cmp.csv;
    }
    return 0;
}

int cmd_gradcheck() {
    const auto results = scotti::gradcheck_suite(/*seed=*/7, /*points=*/10, /*h=*/1e-5);
    bool ok = true;
    for (const auto& [name, max_rel] : results) {
        const bool pass = max_rel <= 1e-5;
        ok = ok && pass;
        std::printf("%-22s max_rel_err=%.3e  %s\n", name.c_str(), max_rel, pass ? "ok" : "FAIL");
    }
    if (!ok) throw scotti::numeric_error("gradient check failed");
    return 0;
}

int cmd_selftest() {
    using scotti::NeuronId;
    int checks = 0;
    const auto require = [&checks](bool cond, const std::string& what) {
        ++checks;
        if (!cond) throw scotti::numeric_error("selftest: " + what);
        std::printf("ok  %s\n", what.c_str());
    };

    // similarity stays in [-1, 1] on random unit snapshots
    scotti::Rng rng(11);
    {
        bool in_range = true;
        for (int trial = 0; trial < 200 && in_range; ++trial) {
            scotti::OutputSnapshot a, b;
            a.epoch = 0;
            b.epoch = 1;
            std::vector<double> va(16), vb(16);
            double na = 0, nb = 0;
            for (int i = 0; i < 16; ++i) {
                va[i] = rng.gauss();
                vb[i] = rng.gauss();
                na += va[i] * va[i];
                nb += vb[i] * vb[i];
            }
            na = std::sqrt(na);
            nb = std::sqrt(nb);
            for (int i = 0; i < 16; ++i) {
                va[i] /= na;
                vb[i] /= nb;
            }
            a.units.push_back(va);
            b.units.push_back(vb);
            const double phi = scotti::cosine_phi(b, a, 0);
            in_range = phi >= -1.0 - 1e-12 && phi <= 1.0 + 1e-12;
        }
        require(in_range, "output similarity bounded in [-1, 1]");
    }

    // velocity worked example: phi 0.8 -> 0.9 with v_prev 0.2, mu 0.5 gives
    // (0.9-0.8) - 0.5*0.2, i.e. zero up to the representation of the inputs
    {
        const double v = scotti::velocity_step(0.9, 0.8, 0.2, 0.5);
        require(v == (0.9 - 0.8) - 0.5 * 0.2 && std::abs(v) < 1e-16,
                "velocity worked example (0.9, 0.8, v_prev 0.2, mu 0.5) = 0");
    }

    // freeze mask grows monotonically with the threshold
    {
        std::map<NeuronId, double> vel;
        for (int i = 0; i < 40; ++i) vel[{0, i}] = rng.uniform(-0.2, 0.2);
        bool monotone = true;
        for (int step = 0; step < 20 && monotone; ++step) {
            const double lo = rng.uniform(0.0, 0.1), hi = lo + rng.uniform(0.0, 0.1);
            const auto small = scotti::compute_freeze_mask(vel, lo, 1);
            const auto big = scotti::compute_freeze_mask(vel, hi, 1);
            for (const NeuronId& id : small.frozen) monotone = monotone && big.contains(id);
        }
        require(monotone, "freeze mask monotone in the threshold");
    }

    // ledger closed form: freezing everything for the second half of a run
    // with forward == backward cost saves exactly 25%
    {
        scotti::FlopsLedger ledger;
        scotti::EpochFlops full, frozen;
        full.forward = 1000;
        full.backward_weight = 600;
        full.backward_input = 400;
        frozen.forward = 1000;
        for (int e = 0; e < 4; ++e) ledger.add_epoch(e < 2 ? full : frozen, full);
        require(ledger.saved_percent() == 25.0, "half-run full-freeze saves 25.00%");
    }

    // gradcheck spot check: one point per op family
    {
        const auto results = scotti::gradcheck_suite(/*seed=*/23, /*points=*/2, /*h=*/1e-5);
        bool ok = true;
        for (const auto& [name, max_rel] : results) ok = ok && max_rel <= 1e-5;
        require(ok, "gradient spot check across op families");
    }

    std::printf("selftest passed (%d checks)\n", checks);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"per-neuron freezing trainer: equilibrium-gated updates with learned step size "
                 "and threshold"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* train = app.add_subcommand("train", "run one training config");
    train->add_option("config", config_path, "path to a key = value config file")->required();

    std::string report_dir;
    CLI::App* report = app.add_subcommand("report", "summarize one finished run directory");
    report->add_option("run_dir", report_dir, "directory holding report.json")->required();

    std::vector<std::string> compare_dirs;
    std::string compare_csv;
    CLI::App* compare = app.add_subcommand("compare", "tabulate several runs side by side");
    compare->add_option("run_dirs", compare_dirs, "two or more run directories")
        ->required()
        ->expected(-2);
    compare->add_option("--csv", compare_csv, "also write the table as CSV to this file");

    CLI::App* gradcheck = app.add_subcommand("gradcheck", "verify analytic gradients against "
                                                          "finite differences");
    CLI::App* selftest = app.add_subcommand("selftest", "run fast built-in property checks");

    try {
        app.parse(argc, argv);
        if (train->parsed()) return cmd_train(config_path);
        if (report->parsed()) return cmd_report(report_dir);
        if (compare->parsed()) return cmd_compare(compare_dirs, compare_csv);
        if (gradcheck->parsed()) return cmd_gradcheck();
        if (selftest->parsed()) return cmd_selftest();
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const scotti::config_error& e) {
        std::fprintf(stderr, "%s\n", e.what());  // what() carries its own prefix
        return 1;
    } catch (const scotti::parse_error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
