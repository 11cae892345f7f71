#include "scotti/gradcheck.hpp"

#include <cmath>

#include "scotti/error.hpp"
#include "scotti/rng.hpp"

namespace scotti {

namespace {

double eval_at(const GraphBuilder& f, const std::vector<Tensor>& point) {
    Graph g;
    std::vector<int> ids;
    ids.reserve(point.size());
    for (const Tensor& t : point) ids.push_back(g.add_input(t, false));
    const int out = f(g, ids);
    const Tensor& v = g.value(out);
    if (v.numel() != 1)
        throw contract_error("grad_check builder must return a scalar, got " + v.shape_str());
    return v.data[0];
}

}  // namespace

GradCheckReport grad_check(const GraphBuilder& f, const std::vector<Tensor>& point, double h) {
    if (!(h > 0.0)) throw contract_error("grad_check needs h > 0");
    if (point.empty()) throw contract_error("grad_check needs at least one leaf tensor");

    // Analytic gradients via one reverse sweep.
    Graph g;
    std::vector<int> ids;
    ids.reserve(point.size());
    for (const Tensor& t : point) ids.push_back(g.add_input(t, true));
    const int out = f(g, ids);
    if (g.value(out).numel() != 1)
        throw contract_error("grad_check builder must return a scalar, got " +
                             g.value(out).shape_str());
    g.backward(out);

    GradCheckReport rep;
    std::vector<Tensor> probe = point;
    for (std::size_t leaf = 0; leaf < point.size(); ++leaf) {
        const std::vector<double>& an = g.grad(ids[leaf]);
        for (std::size_t i = 0; i < probe[leaf].numel(); ++i) {
            const double keep = probe[leaf].data[i];
            probe[leaf].data[i] = keep + h;
            const double fp = eval_at(f, probe);
            probe[leaf].data[i] = keep - h;
            const double fm = eval_at(f, probe);
            probe[leaf].data[i] = keep;

            const double numeric = (fp - fm) / (2.0 * h);
            const double analytic = an.empty() ? 0.0 : an[i];
            const double rel =
                std::fabs(analytic - numeric) / std::max(1.0, std::fabs(analytic));
            if (rel > rep.max_rel_err) rep.max_rel_err = rel;
            ++rep.coords_checked;
        }
    }
    return rep;
}

namespace {

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, double scale) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = rng.uniform(-scale, scale);
    return t;
}

std::vector<int> random_labels(Rng& rng, std::size_t rows, int classes) {
    std::vector<int> y(rows);
    for (int& v : y) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    return y;
}

}  // namespace

std::vector<std::pair<std::string, double>> gradcheck_suite(std::uint64_t seed, int points,
                                                            double h) {
    Rng rng(seed);
    std::vector<std::pair<std::string, double>> out;

    auto run = [&](const std::string& name, auto make_point, const GraphBuilder& builder) {
        double worst = 0.0;
        for (int p = 0; p < points; ++p) {
            const GradCheckReport rep = grad_check(builder, make_point(), h);
            if (rep.max_rel_err > worst) worst = rep.max_rel_err;
        }
        out.emplace_back(name, worst);
    };

    run(
        "matmul",
        [&] {
            return std::vector<Tensor>{random_tensor(rng, {3, 4}, 1.0),
                                       random_tensor(rng, {4, 2}, 1.0)};
        },
        [](Graph& g, const std::vector<int>& ids) { return g.sum(g.matmul(ids[0], ids[1])); });

    run(
        "linear",
        [&] {
            return std::vector<Tensor>{random_tensor(rng, {4, 5}, 1.0),
                                       random_tensor(rng, {3, 5}, 1.0),
                                       random_tensor(rng, {3}, 1.0)};
        },
        [](Graph& g, const std::vector<int>& ids) {
            return g.sum(g.linear(ids[0], ids[1], ids[2]));
        });

    run(
        "conv2d",
        [&] {
            return std::vector<Tensor>{random_tensor(rng, {2, 2, 5, 5}, 1.0),
                                       random_tensor(rng, {3, 2, 3, 3}, 1.0),
                                       random_tensor(rng, {3}, 1.0)};
        },
        [](Graph& g, const std::vector<int>& ids) {
            return g.sum(g.conv2d(ids[0], ids[1], ids[2]));
        });

    // Offset inputs away from 0 so the relu kink never sits inside the
    // central-difference window.
    run(
        "relu",
        [&] {
            Tensor t = random_tensor(rng, {4, 6}, 1.0);
            for (double& v : t.data) v += (v >= 0.0 ? 0.25 : -0.25);
            return std::vector<Tensor>{t};
        },
        [](Graph& g, const std::vector<int>& ids) { return g.sum(g.relu(ids[0])); });

    {
        // Labels must stay fixed across the analytic pass and every
        // finite-difference evaluation of one point, so bind them per point.
        double worst = 0.0;
        for (int p = 0; p < points; ++p) {
            const std::vector<int> labels = random_labels(rng, 5, 4);
            const std::vector<Tensor> point{random_tensor(rng, {5, 4}, 2.0)};
            const GradCheckReport rep = grad_check(
                [&labels](Graph& g, const std::vector<int>& ids) {
                    return g.softmax_xent(ids[0], labels);
                },
                point, h);
            if (rep.max_rel_err > worst) worst = rep.max_rel_err;
        }
        out.emplace_back("softmax_xent", worst);
    }

    {
        // Three dense layers with relus and a softmax loss: checks gradient
        // flow through the whole stack at once.
        double worst = 0.0;
        for (int p = 0; p < points; ++p) {
            const std::vector<int> labels = random_labels(rng, 3, 2);
            const Tensor x = random_tensor(rng, {3, 5}, 1.0);
            const std::vector<Tensor> point{
                random_tensor(rng, {4, 5}, 0.8), random_tensor(rng, {4}, 0.5),
                random_tensor(rng, {3, 4}, 0.8), random_tensor(rng, {3}, 0.5),
                random_tensor(rng, {2, 3}, 0.8), random_tensor(rng, {2}, 0.5)};
            const GradCheckReport rep = grad_check(
                [&x, &labels](Graph& g, const std::vector<int>& ids) {
                    const int xin = g.add_input(x, false);
                    const int h1 = g.relu(g.linear(xin, ids[0], ids[1]));
                    const int h2 = g.relu(g.linear(h1, ids[2], ids[3]));
                    const int logits = g.linear(h2, ids[4], ids[5]);
                    return g.softmax_xent(logits, labels);
                },
                point, h);
            if (rep.max_rel_err > worst) worst = rep.max_rel_err;
        }
        out.emplace_back("mlp_composite", worst);
    }

    return out;
}

}  // namespace scotti
