#include "scotti/kernels.hpp"

#include <vector>

#include "kernels_detail.hpp"

// OpenMP backend. Threads split disjoint output elements; every element is
// computed by the same detail:: helper as the serial backend with the same
// serial reduction order, so results match the reference bitwise. Reductions
// across rows (softmax loss) go through a buffer and a fixed-order serial sum
// instead of an OpenMP reduction clause for the same reason. Compiled without
// OpenMP the pragmas are no-ops and this backend degrades to the serial one.

namespace scotti::kernels::par {

using namespace scotti::kernels::detail;

void matmul_nn(double* c, const double* a, const double* b, int m, int k, int n) {
#pragma omp parallel for collapse(2)
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) c[i * n + j] = mm_nn_elem(a, b, k, n, i, j);
}

void matmul_nn_acc(double* c, const double* a, const double* b, int m, int k, int n) {
#pragma omp parallel for collapse(2)
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) c[i * n + j] += mm_nn_elem(a, b, k, n, i, j);
}

void matmul_nt_acc(double* c, const double* a, const double* b, int m, int p, int n) {
#pragma omp parallel for collapse(2)
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) c[i * n + j] += dot(a + i * p, b + j * p, p);
}

void matmul_tn_acc(double* c, const double* a, const double* b, int m, int k, int n) {
#pragma omp parallel for collapse(2)
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) c[i * n + j] += mm_tn_elem(a, b, m, k, n, i, j);
}

void linear_fwd(double* y, const double* x, const double* w, const double* bias, int batch,
                int in, int out) {
#pragma omp parallel for collapse(2)
    for (int b = 0; b < batch; ++b)
        for (int o = 0; o < out; ++o)
            y[b * out + o] = dot(x + b * in, w + o * in, in) + (bias ? bias[o] : 0.0);
}

void linear_grad_w(double* dw, const double* dy, const double* x, int batch, int in, int out,
                   const unsigned char* skip) {
#pragma omp parallel for
    for (int o = 0; o < out; ++o) {
        if (skip && skip[o]) continue;
        for (int i = 0; i < in; ++i) {
            double acc = 0.0;
            for (int b = 0; b < batch; ++b) acc += dy[b * out + o] * x[b * in + i];
            dw[o * in + i] += acc;
        }
    }
}

void bias_grad(double* db, const double* dy, int batch, int out, const unsigned char* skip) {
#pragma omp parallel for
    for (int o = 0; o < out; ++o) {
        if (skip && skip[o]) continue;
        db[o] += bias_grad_elem(dy, batch, out, o);
    }
}

void relu_fwd(double* y, const double* x, std::size_t n) {
    const long long nn = static_cast<long long>(n);
#pragma omp parallel for
    for (long long i = 0; i < nn; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd(double* dx, const double* dy, const double* x, std::size_t n) {
    const long long nn = static_cast<long long>(n);
#pragma omp parallel for
    for (long long i = 0; i < nn; ++i) dx[i] += x[i] > 0.0 ? dy[i] : 0.0;
}

void conv3x3_fwd(double* y, const double* x, const double* k, const double* bias, int n, int c,
                 int h, int w, int f) {
    const int oh = h - 2, ow = w - 2;
#pragma omp parallel for collapse(2)
    for (int img = 0; img < n; ++img)
        for (int filt = 0; filt < f; ++filt) {
            double* yp = y + (static_cast<long long>(img) * f + filt) * oh * ow;
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox)
                    yp[oy * ow + ox] = conv_fwd_elem(x, k, c, h, w, img, filt, oy, ox) +
                                       (bias ? bias[filt] : 0.0);
        }
}

void conv3x3_grad_x(double* dx, const double* dy, const double* k, int n, int c, int h, int w,
                    int f) {
#pragma omp parallel for collapse(2)
    for (int img = 0; img < n; ++img)
        for (int ch = 0; ch < c; ++ch) {
            double* dxp = dx + (static_cast<long long>(img) * c + ch) * h * w;
            for (int iy = 0; iy < h; ++iy)
                for (int ix = 0; ix < w; ++ix)
                    dxp[iy * w + ix] += conv_dx_elem(dy, k, c, h, w, f, img, ch, iy, ix);
        }
}

void conv3x3_grad_k(double* dk, const double* dy, const double* x, int n, int c, int h, int w,
                    int f, const unsigned char* skip) {
#pragma omp parallel for
    for (int filt = 0; filt < f; ++filt) {
        if (skip && skip[filt]) continue;
        conv_dk_filter(dk, dy, x, n, c, h, w, f, filt);
    }
}

void conv3x3_grad_b(double* db, const double* dy, int n, int f, int oh, int ow,
                    const unsigned char* skip) {
#pragma omp parallel for
    for (int filt = 0; filt < f; ++filt) {
        if (skip && skip[filt]) continue;
        db[filt] += conv_db_filter(dy, n, f, oh, ow, filt);
    }
}

double softmax_xent_fwd(const double* logits, const int* labels, int rows, int classes,
                        double* probs) {
    std::vector<double> row_loss(static_cast<std::size_t>(rows));
#pragma omp parallel for
    for (int r = 0; r < rows; ++r)
        row_loss[r] = xent_row(logits + static_cast<long long>(r) * classes, labels[r], classes,
                               probs ? probs + static_cast<long long>(r) * classes : nullptr);
    double total = 0.0;  // fixed-order reduction, shared with the serial backend
    for (int r = 0; r < rows; ++r) total += row_loss[r];
    return total / rows;
}

void softmax_xent_bwd(double* dlogits, const double* logits, const int* labels, int rows,
                      int classes, double upstream) {
    const double scale = upstream / rows;
#pragma omp parallel for
    for (int r = 0; r < rows; ++r)
        xent_bwd_row(dlogits + static_cast<long long>(r) * classes,
                     logits + static_cast<long long>(r) * classes, labels[r], classes, scale);
}

}  // namespace scotti::kernels::par
