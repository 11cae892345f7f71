#include "scotti/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "scotti/equilibrium.hpp"
#include "scotti/error.hpp"
#include "scotti/flops.hpp"
#include "scotti/graph.hpp"
#include "scotti/model.hpp"
#include "scotti/optimizer.hpp"
#include "scotti/rng.hpp"

namespace scotti {

namespace {

// 64-bit FNV-1a over the raw bytes of every parameter scalar, in order.
std::uint64_t param_fnv1a(const Model& m) {
    std::uint64_t hash = 14695981039346656037ull;
    for (const Tensor& p : m.params()) {
        for (double v : p.data) {
            unsigned char bytes[sizeof v];
            std::memcpy(bytes, &v, sizeof v);
            for (unsigned char b : bytes) {
                hash ^= b;
                hash *= 1099511628211ull;
            }
        }
    }
    return hash;
}

// Baseline step schedule: α₀ divided by 10 at every milestone fraction of
// the run that has been passed (milestone epoch = floor(fraction · epochs)).
double scheduled_alpha(const TrainConfig& cfg, int epoch) {
    double a = cfg.alpha0;
    for (double frac : cfg.lr_milestones)
        if (epoch >= static_cast<int>(frac * cfg.epochs)) a /= 10.0;
    return a;
}

Tensor gather_rows(const Split& s, const std::vector<std::size_t>& order, std::size_t at,
                   std::size_t rows, std::size_t width, std::vector<int>& labels_out) {
    Tensor x = Tensor::zeros({rows, width});
    labels_out.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t src = order[at + r];
        std::copy_n(s.x.data.begin() + static_cast<std::ptrdiff_t>(src * width), width,
                    x.data.begin() + static_cast<std::ptrdiff_t>(r * width));
        labels_out[r] = s.y[src];
    }
    return x;
}

// Top-1 accuracy over a split; evaluation forwards are never booked.
double eval_accuracy(const Model& m, const Split& s, std::size_t batch) {
    const std::size_t n = s.size(), width = s.x.shape[1];
    if (n == 0) throw validation_error("cannot evaluate on an empty split");
    std::size_t correct = 0;
    for (std::size_t at = 0; at < n; at += batch) {
        const std::size_t rows = std::min(batch, n - at);
        Tensor xb = Tensor::zeros({rows, width});
        std::copy_n(s.x.data.begin() + static_cast<std::ptrdiff_t>(at * width), rows * width,
                    xb.data.begin());
        Graph g;
        const ForwardNodes f = m.forward(g, xb);
        const Tensor& logits = g.value(f.logits);
        const std::size_t classes = logits.shape[1];
        for (std::size_t r = 0; r < rows; ++r) {
            const double* l = logits.data.data() + r * classes;
            std::size_t best = 0;
            for (std::size_t k = 1; k < classes; ++k)
                if (l[k] > l[best]) best = k;
            if (static_cast<int>(best) == s.y[at + r]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json config_to_json(const TrainConfig& c) {
    return {{"seed", c.seed},
            {"model", c.model},
            {"dataset", c.dataset},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"alpha0", c.alpha0},
            {"momentum", c.momentum},
            {"weight_decay", c.weight_decay},
            {"mode", mode_name(c.mode)},
            {"epsilon0", c.epsilon0},
            {"eta_alpha", c.eta_alpha},
            {"eta_epsilon", c.eta_epsilon},
            {"mu_eq", c.mu_eq},
            {"probe_size", c.probe_size},
            {"epsilon_update_sign",
             c.epsilon_update_sign == EpsilonSign::paper ? "paper" : "flipped"},
            {"count_probe_overhead", c.count_probe_overhead},
            {"lr_milestones", c.lr_milestones},
            {"output_dir", c.output_dir}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.seed = j.at("seed").get<std::uint64_t>();
    c.model = j.at("model").get<std::string>();
    c.dataset = j.at("dataset").get<std::string>();
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.alpha0 = j.at("alpha0").get<double>();
    c.momentum = j.at("momentum").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "baseline") c.mode = Mode::baseline;
    else if (mode == "fixed_eps") c.mode = Mode::fixed_eps;
    else if (mode == "ultimate") c.mode = Mode::ultimate;
    else if (mode == "scotti") c.mode = Mode::scotti;
    else throw parse_error("report config: unknown mode '" + mode + "'");
    c.epsilon0 = j.at("epsilon0").get<double>();
    c.eta_alpha = j.at("eta_alpha").get<double>();
    c.eta_epsilon = j.at("eta_epsilon").get<double>();
    c.mu_eq = j.at("mu_eq").get<double>();
    c.probe_size = j.at("probe_size").get<int>();
    c.epsilon_update_sign = j.at("epsilon_update_sign").get<std::string>() == "flipped"
                                ? EpsilonSign::flipped
                                : EpsilonSign::paper;
    c.count_probe_overhead = j.at("count_probe_overhead").get<bool>();
    c.lr_milestones = j.at("lr_milestones").get<std::vector<double>>();
    c.output_dir = j.at("output_dir").get<std::string>();
    return c;
}

}  // namespace

nlohmann::json RunReport::to_json() const {
    nlohmann::json j;
    j["config"] = config_to_json(config);
    j["loss"] = loss;
    j["train_acc"] = train_acc;
    j["test_acc"] = test_acc;
    j["alpha"] = alpha;
    j["epsilon"] = epsilon;
    j["frozen_count"] = frozen_count;
    j["epoch_flops"] = epoch_flops;
    j["vel_min"] = vel_min;
    j["vel_mean"] = vel_mean;
    j["vel_max"] = vel_max;
    j["param_digest"] = param_digest;
    j["hyper_trace_columns"] = {"alpha", "epsilon", "dot_alpha", "dot_epsilon"};
    nlohmann::json trace = nlohmann::json::array();
    for (const HyperTraceRow& r : hyper_trace)
        trace.push_back({r.alpha, r.epsilon, r.dot_alpha, r.dot_epsilon});
    j["hyper_trace"] = std::move(trace);
    j["final_train_acc"] = final_train_acc;
    j["final_test_acc"] = final_test_acc;
    j["flops_saved"] = flops_saved;
    j["flops"] = flops;
    return j;
}

RunReport RunReport::from_json(const nlohmann::json& j) {
    RunReport r;
    r.config = config_from_json(j.at("config"));
    r.loss = j.at("loss").get<std::vector<double>>();
    r.train_acc = j.at("train_acc").get<std::vector<double>>();
    r.test_acc = j.at("test_acc").get<std::vector<double>>();
    r.alpha = j.at("alpha").get<std::vector<double>>();
    r.epsilon = j.at("epsilon").get<std::vector<double>>();
    r.frozen_count = j.at("frozen_count").get<std::vector<int>>();
    r.epoch_flops = j.at("epoch_flops").get<std::vector<std::uint64_t>>();
    r.vel_min = j.at("vel_min").get<std::vector<double>>();
    r.vel_mean = j.at("vel_mean").get<std::vector<double>>();
    r.vel_max = j.at("vel_max").get<std::vector<double>>();
    r.param_digest = j.at("param_digest").get<std::vector<std::uint64_t>>();
    for (const nlohmann::json& row : j.at("hyper_trace")) {
        if (!row.is_array() || row.size() != 4)
            throw parse_error("report: hyper_trace rows must be 4-element arrays");
        r.hyper_trace.push_back(
            {row[0].get<double>(), row[1].get<double>(), row[2].get<double>(), row[3].get<double>()});
    }
    r.final_train_acc = j.at("final_train_acc").get<double>();
    r.final_test_acc = j.at("final_test_acc").get<double>();
    r.flops_saved = j.at("flops_saved").get<double>();
    r.flops = j.at("flops");
    return r;
}

RunReport run_training(const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw config_error("epochs must be ≥ 1");
    if (cfg.batch_size < 1) throw config_error("batch_size must be ≥ 1");
    if (cfg.probe_size < 1) throw config_error("probe_size must be ≥ 1");

    const Dataset data = load_dataset(cfg.dataset, cfg.seed);
    Rng model_rng = Rng(cfg.seed).sub(0);
    Model m = model_from_spec(cfg.model, model_rng);
    if (m.input_width() != static_cast<std::size_t>(data.features))
        throw config_error("model expects input width " + std::to_string(m.input_width()) +
                           " but dataset has " + std::to_string(data.features) + " features");
    if (m.classes() != data.classes)
        throw config_error("model has " + std::to_string(m.classes()) + " classes but dataset has " +
                           std::to_string(data.classes));

    const std::size_t probe_rows = static_cast<std::size_t>(cfg.probe_size);
    if (data.val.size() < probe_rows)
        throw validation_error("validation split has " + std::to_string(data.val.size()) +
                               " samples, fewer than probe_size " + std::to_string(cfg.probe_size));
    const std::size_t width = static_cast<std::size_t>(data.features);
    Tensor probe = Tensor::zeros({probe_rows, width});
    std::copy_n(data.val.x.data.begin(), probe_rows * width, probe.data.begin());

    EquilibriumTracker tracker(m, std::move(probe), cfg.mu_eq);

    HyperState h;
    h.alpha = cfg.alpha0;
    h.epsilon = cfg.epsilon0;
    h.eta_alpha = cfg.eta_alpha;
    h.eta_epsilon = cfg.eta_epsilon;
    h.momentum = cfg.momentum;
    h.weight_decay = cfg.weight_decay;
    h.epsilon_sign = cfg.epsilon_update_sign;
    h.init(m.param_scalar_count());

    FlopsLedger ledger(cfg.count_probe_overhead);
    Rng shuffle_rng = Rng(cfg.seed).sub(3);

    const std::size_t n_train = data.train.size();
    if (n_train == 0) throw validation_error("training split is empty");
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

    RunReport rep;
    rep.config = cfg;
    FreezeMask mask;  // empty during epoch 0: nothing is known yet

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.mode == Mode::baseline) h.alpha = scheduled_alpha(cfg, epoch);
        ledger.begin_epoch();
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        std::size_t iteration = 0;
        for (std::size_t at = 0; at < n_train; at += batch, ++iteration) {
            const std::size_t rows = std::min(batch, n_train - at);
            std::vector<int> labels;
            const Tensor xb = gather_rows(data.train, order, at, rows, width, labels);

            rep.hyper_trace.push_back({h.alpha, h.epsilon, 0.0, 0.0});
            IterationResult r;
            try {
                r = train_iteration(m, xb, labels, mask, h);
            } catch (const numeric_error& e) {
                throw numeric_error("epoch " + std::to_string(epoch) + ", iteration " +
                                    std::to_string(iteration) + ": " + e.what());
            }
            rep.hyper_trace.back().dot_alpha = r.dot_alpha;
            rep.hyper_trace.back().dot_epsilon = r.dot_epsilon;

            ledger.book_iteration(m, mask, rows);
            ledger.book_hyper(m.param_scalar_count());
            loss_sum += r.loss * static_cast<double>(rows);
            correct += static_cast<std::size_t>(r.correct);
        }

        // End-of-epoch probe: snapshot, velocities, and the mask for the
        // next epoch. Modes without freezing never apply the mask.
        ledger.book_probe(m, probe_rows);
        FreezeMask next = tracker.end_of_epoch(m, epoch, h.epsilon);

        rep.loss.push_back(loss_sum / static_cast<double>(n_train));
        rep.train_acc.push_back(static_cast<double>(correct) / static_cast<double>(n_train));
        rep.test_acc.push_back(eval_accuracy(m, data.test, batch));
        rep.alpha.push_back(h.alpha);
        rep.epsilon.push_back(h.epsilon);
        rep.frozen_count.push_back(static_cast<int>(mask.size()));
        rep.epoch_flops.push_back(ledger.epoch_spent(static_cast<std::size_t>(epoch)));
        if (tracker.has_velocities()) {
            const std::vector<double>& v = tracker.velocities();
            double lo = std::abs(v[0]), hi = lo, sum = 0.0;
            for (double x : v) {
                const double a = std::abs(x);
                lo = std::min(lo, a);
                hi = std::max(hi, a);
                sum += a;
            }
            rep.vel_min.push_back(lo);
            rep.vel_mean.push_back(sum / static_cast<double>(v.size()));
            rep.vel_max.push_back(hi);
        } else {
            rep.vel_min.push_back(0.0);
            rep.vel_mean.push_back(0.0);
            rep.vel_max.push_back(0.0);
        }
        rep.param_digest.push_back(param_fnv1a(m));

        if (cfg.freezing_enabled()) mask = std::move(next);
    }

    rep.final_train_acc = rep.train_acc.back();
    rep.final_test_acc = rep.test_acc.back();
    rep.flops_saved = ledger.saved_percent();
    rep.flops = ledger.to_json();
    return rep;
}

void emit_metrics(const RunReport& rep, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output dir '" + dir + "': " + ec.message());

    const std::string csv_path = dir + "/metrics.csv";
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw io_error("cannot write '" + csv_path + "'");
    csv << "epoch,loss,train_acc,test_acc,alpha,epsilon,frozen_count,epoch_flops\n";
    for (std::size_t e = 0; e < rep.loss.size(); ++e) {
        csv << e << ',' << fmt17(rep.loss[e]) << ',' << fmt17(rep.train_acc[e]) << ','
            << fmt17(rep.test_acc[e]) << ',' << fmt17(rep.alpha[e]) << ','
            << fmt17(rep.epsilon[e]) << ',' << rep.frozen_count[e] << ',' << rep.epoch_flops[e]
            << '\n';
    }
    if (!csv.flush()) throw io_error("write failed on '" + csv_path + "'");

    const std::string json_path = dir + "/report.json";
    std::ofstream js(json_path, std::ios::binary);
    if (!js) throw io_error("cannot write '" + json_path + "'");
    js << rep.to_json().dump() << '\n';
    if (!js.flush()) throw io_error("write failed on '" + json_path + "'");
}

RunReport load_report(const std::string& run_dir) {
    const std::string path = run_dir + "/report.json";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("'" + path + "': " + e.what());
    }
    try {
        return RunReport::from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("'" + path + "': " + e.what());
    }
}

Comparison compare_runs(const std::vector<RunReport>& reports) {
    if (reports.size() < 2)
        throw contract_error("compare_runs needs at least 2 reports, got " +
                             std::to_string(reports.size()));

    Comparison out;
    for (std::size_t i = 1; i < reports.size(); ++i) {
        const TrainConfig& a = reports[0].config;
        const TrainConfig& b = reports[i].config;
        if (a.dataset != b.dataset)
            out.warnings.push_back("run " + std::to_string(i) + " dataset '" + b.dataset +
                                   "' differs from run 0 '" + a.dataset + "'");
        if (a.model != b.model)
            out.warnings.push_back("run " + std::to_string(i) + " model '" + b.model +
                                   "' differs from run 0 '" + a.model + "'");
    }

    std::ostringstream text;
    std::ostringstream csv;
    text << "mode        flops_saved   final_test_acc\n";
    csv << "mode,flops_saved_percent,final_test_acc\n";
    for (const RunReport& r : reports) {
        char saved[32], acc[32];
        std::snprintf(saved, sizeof saved, "%05.2f%%", r.flops_saved);
        std::snprintf(acc, sizeof acc, "%.2f%%", 100.0 * r.final_test_acc);
        char line[96];
        std::snprintf(line, sizeof line, "%-11s %12s %16s\n", mode_name(r.config.mode).c_str(),
                      saved, acc);
        text << line;
        csv << mode_name(r.config.mode) << ',' << fmt17(r.flops_saved) << ','
            << fmt17(r.final_test_acc) << '\n';
    }
    for (const std::string& w : out.warnings) text << "warning: " << w << '\n';
    out.text = text.str();
    out.csv = csv.str();
    return out;
}

}  // namespace scotti
