#pragma once

#include <cstddef>

// Numeric kernels behind the autodiff ops. Two implementations share every
// signature: a plain serial reference and an OpenMP-parallel version that
// splits work over disjoint output elements while keeping each element's
// reduction order identical to the serial code. Results are therefore
// bitwise equal across backends; tests rely on that.
//
// Backend selection: set_backend() wins; otherwise the SCOTTI_BACKEND
// environment variable ("serial" or "parallel") is consulted once at first
// use; default is parallel.

namespace scotti::kernels {

enum class Backend { serial, parallel };

Backend backend();
void set_backend(Backend b);

#define SCOTTI_KERNEL_API                                                                          \
    /* c[m×n] = a[m×k]·b[k×n] */                                                                   \
    void matmul_nn(double* c, const double* a, const double* b, int m, int k, int n);              \
    /* c[m×n] += a[m×k]·b[k×n] */                                                                  \
    void matmul_nn_acc(double* c, const double* a, const double* b, int m, int k, int n);          \
    /* c[m×n] += a[m×p]·b[n×p]ᵀ */                                                                 \
    void matmul_nt_acc(double* c, const double* a, const double* b, int m, int p, int n);          \
    /* c[k×n] += a[m×k]ᵀ·b[m×n] */                                                                 \
    void matmul_tn_acc(double* c, const double* a, const double* b, int m, int k, int n);          \
    /* y[B×out] = x[B×in]·w[out×in]ᵀ + bias[out] (bias may be null) */                             \
    void linear_fwd(double* y, const double* x, const double* w, const double* bias, int batch,    \
                    int in, int out);                                                              \
    /* dw[o,:] += Σ_b dy[b,o]·x[b,:] for rows with !skip[o]; skip may be null */                   \
    void linear_grad_w(double* dw, const double* dy, const double* x, int batch, int in, int out,  \
                       const unsigned char* skip);                                                 \
    /* db[o] += Σ_b dy[b,o] for units with !skip[o]; skip may be null */                           \
    void bias_grad(double* db, const double* dy, int batch, int out,                               \
                   const unsigned char* skip);                                                     \
    /* y = max(x, 0) elementwise */                                                                \
    void relu_fwd(double* y, const double* x, std::size_t n);                                      \
    /* dx += dy ⊙ [x > 0] elementwise */                                                           \
    void relu_bwd(double* dx, const double* dy, const double* x, std::size_t n);                   \
    /* 3×3 valid cross-correlation, stride 1: x[N,C,H,W], k[F,C,3,3], bias[F] or null,             \
       y[N,F,H-2,W-2] (overwritten) */                                                             \
    void conv3x3_fwd(double* y, const double* x, const double* k, const double* bias, int n,       \
                     int c, int h, int w, int f);                                                  \
    /* dx[N,C,H,W] += full correlation of dy with k */                                             \
    void conv3x3_grad_x(double* dx, const double* dy, const double* k, int n, int c, int h,        \
                        int w, int f);                                                             \
    /* dk[f,:,:,:] += for filters with !skip[f]; skip may be null */                               \
    void conv3x3_grad_k(double* dk, const double* dy, const double* x, int n, int c, int h,        \
                        int w, int f, const unsigned char* skip);                                  \
    /* db[f] += Σ dy[:,f,:,:] for filters with !skip[f]; dy is [N,F,OH,OW] */                      \
    void conv3x3_grad_b(double* db, const double* dy, int n, int f, int oh, int ow,                \
                        const unsigned char* skip);                                                \
    /* mean cross-entropy of row-wise softmax; probs (rows×classes) receives the                   \
       softmax if non-null; returns the scalar loss */                                             \
    double softmax_xent_fwd(const double* logits, const int* labels, int rows, int classes,        \
                            double* probs);                                                        \
    /* dlogits += upstream·(softmax − onehot)/rows */                                              \
    void softmax_xent_bwd(double* dlogits, const double* logits, const int* labels, int rows,      \
                          int classes, double upstream);

// Dispatching entry points (respect backend()).
SCOTTI_KERNEL_API

namespace serial {
SCOTTI_KERNEL_API
}
namespace par {
SCOTTI_KERNEL_API
}

#undef SCOTTI_KERNEL_API

}  // namespace scotti::kernels
