#pragma once

#include <cmath>

// Per-output-element arithmetic shared verbatim by the serial and parallel
// kernel backends. Each helper computes one output element (or one disjoint
// block) with a fixed serial reduction order, which is what makes the two
// backends bitwise identical.

namespace scotti::kernels::detail {

inline double dot(const double* a, const double* b, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

// Row i of a[m×k] times column j of b[k×n].
inline double mm_nn_elem(const double* a, const double* b, int k, int n, int i, int j) {
    double acc = 0.0;
    for (int l = 0; l < k; ++l) acc += a[i * k + l] * b[l * n + j];
    return acc;
}

// Column i of a[m×k] times column j of b[m×n].
inline double mm_tn_elem(const double* a, const double* b, int m, int k, int n, int i, int j) {
    double acc = 0.0;
    for (int l = 0; l < m; ++l) acc += a[l * k + i] * b[l * n + j];
    return acc;
}

// One output pixel of the 3×3 valid cross-correlation (no bias).
inline double conv_fwd_elem(const double* x, const double* kern, int c, int h, int w, int img,
                            int filt, int oy, int ox) {
    double acc = 0.0;
    for (int ch = 0; ch < c; ++ch) {
        const double* xp = x + ((static_cast<long long>(img) * c + ch) * h + oy) * w + ox;
        const double* kp = kern + (static_cast<long long>(filt) * c + ch) * 9;
        for (int ki = 0; ki < 3; ++ki)
            for (int kj = 0; kj < 3; ++kj) acc += xp[ki * w + kj] * kp[ki * 3 + kj];
    }
    return acc;
}

// One input pixel of the conv input gradient: correlate dy with the kernel
// over all filters and valid kernel offsets.
inline double conv_dx_elem(const double* dy, const double* kern, int c, int h, int w, int f,
                           int img, int ch, int iy, int ix) {
    const int oh = h - 2, ow = w - 2;
    double acc = 0.0;
    for (int filt = 0; filt < f; ++filt) {
        const double* dyp = dy + (static_cast<long long>(img) * f + filt) * oh * ow;
        const double* kp = kern + (static_cast<long long>(filt) * c + ch) * 9;
        for (int ki = 0; ki < 3; ++ki) {
            const int oy = iy - ki;
            if (oy < 0 || oy >= oh) continue;
            for (int kj = 0; kj < 3; ++kj) {
                const int ox = ix - kj;
                if (ox < 0 || ox >= ow) continue;
                acc += dyp[oy * ow + ox] * kp[ki * 3 + kj];
            }
        }
    }
    return acc;
}

// Accumulate one filter's kernel-gradient block. The whole block belongs to
// a single filter, so parallelising over filters keeps writes disjoint.
inline void conv_dk_filter(double* dk, const double* dy, const double* x, int n, int c, int h,
                           int w, int f, int filt) {
    const int oh = h - 2, ow = w - 2;
    for (int ch = 0; ch < c; ++ch) {
        for (int ki = 0; ki < 3; ++ki) {
            for (int kj = 0; kj < 3; ++kj) {
                double acc = 0.0;
                for (int img = 0; img < n; ++img) {
                    const double* dyp = dy + (static_cast<long long>(img) * f + filt) * oh * ow;
                    const double* xp =
                        x + ((static_cast<long long>(img) * c + ch) * h + ki) * w + kj;
                    for (int oy = 0; oy < oh; ++oy)
                        for (int ox = 0; ox < ow; ++ox) acc += dyp[oy * ow + ox] * xp[oy * w + ox];
                }
                dk[((static_cast<long long>(filt) * c + ch) * 3 + ki) * 3 + kj] += acc;
            }
        }
    }
}

// One filter's bias gradient: Σ over images and output pixels of dy.
inline double conv_db_filter(const double* dy, int n, int f, int oh, int ow, int filt) {
    double acc = 0.0;
    for (int img = 0; img < n; ++img) {
        const double* dyp = dy + (static_cast<long long>(img) * f + filt) * oh * ow;
        for (int p = 0; p < oh * ow; ++p) acc += dyp[p];
    }
    return acc;
}

// One unit's bias gradient for a dense layer: Σ over the batch of dy[:,o].
inline double bias_grad_elem(const double* dy, int batch, int out, int o) {
    double acc = 0.0;
    for (int b = 0; b < batch; ++b) acc += dy[b * out + o];
    return acc;
}

// Loss of one softmax/cross-entropy row; fills probs_row when non-null.
inline double xent_row(const double* logits, int label, int classes, double* probs_row) {
    double m = logits[0];
    for (int k = 1; k < classes; ++k)
        if (logits[k] > m) m = logits[k];
    double z = 0.0;
    for (int k = 0; k < classes; ++k) z += std::exp(logits[k] - m);
    if (probs_row)
        for (int k = 0; k < classes; ++k) probs_row[k] = std::exp(logits[k] - m) / z;
    return std::log(z) - (logits[label] - m);
}

// Gradient of one row: dl += scale·(softmax − onehot).
inline void xent_bwd_row(double* dl, const double* logits, int label, int classes, double scale) {
    double m = logits[0];
    for (int k = 1; k < classes; ++k)
        if (logits[k] > m) m = logits[k];
    double z = 0.0;
    for (int k = 0; k < classes; ++k) z += std::exp(logits[k] - m);
    for (int k = 0; k < classes; ++k) {
        const double p = std::exp(logits[k] - m) / z;
        dl[k] += scale * (p - (k == label ? 1.0 : 0.0));
    }
}

}  // namespace scotti::kernels::detail
