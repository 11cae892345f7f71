#include "scotti/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace scotti::kernels {

namespace {

Backend initial_backend() {
    const char* env = std::getenv("SCOTTI_BACKEND");
    if (env && std::strcmp(env, "serial") == 0) return Backend::serial;
    return Backend::parallel;
}

std::atomic<Backend>& backend_state() {
    static std::atomic<Backend> state{initial_backend()};
    return state;
}

}  // namespace

Backend backend() { return backend_state().load(std::memory_order_relaxed); }
void set_backend(Backend b) { backend_state().store(b, std::memory_order_relaxed); }

#define SCOTTI_DISPATCH(call) \
    if (backend() == Backend::serial) return serial::call; \
    return par::call

void matmul_nn(double* c, const double* a, const double* b, int m, int k, int n) {
    SCOTTI_DISPATCH(matmul_nn(c, a, b, m, k, n));
}
void matmul_nn_acc(double* c, const double* a, const double* b, int m, int k, int n) {
    SCOTTI_DISPATCH(matmul_nn_acc(c, a, b, m, k, n));
}
void matmul_nt_acc(double* c, const double* a, const double* b, int m, int p, int n) {
    SCOTTI_DISPATCH(matmul_nt_acc(c, a, b, m, p, n));
}
void matmul_tn_acc(double* c, const double* a, const double* b, int m, int k, int n) {
    SCOTTI_DISPATCH(matmul_tn_acc(c, a, b, m, k, n));
}
void linear_fwd(double* y, const double* x, const double* w, const double* bias, int batch,
                int in, int out) {
    SCOTTI_DISPATCH(linear_fwd(y, x, w, bias, batch, in, out));
}
void linear_grad_w(double* dw, const double* dy, const double* x, int batch, int in, int out,
                   const unsigned char* skip) {
    SCOTTI_DISPATCH(linear_grad_w(dw, dy, x, batch, in, out, skip));
}
void bias_grad(double* db, const double* dy, int batch, int out, const unsigned char* skip) {
    SCOTTI_DISPATCH(bias_grad(db, dy, batch, out, skip));
}
void relu_fwd(double* y, const double* x, std::size_t n) { SCOTTI_DISPATCH(relu_fwd(y, x, n)); }
void relu_bwd(double* dx, const double* dy, const double* x, std::size_t n) {
    SCOTTI_DISPATCH(relu_bwd(dx, dy, x, n));
}
void conv3x3_fwd(double* y, const double* x, const double* k, const double* bias, int n, int c,
                 int h, int w, int f) {
    SCOTTI_DISPATCH(conv3x3_fwd(y, x, k, bias, n, c, h, w, f));
}
void conv3x3_grad_x(double* dx, const double* dy, const double* k, int n, int c, int h, int w,
                    int f) {
    SCOTTI_DISPATCH(conv3x3_grad_x(dx, dy, k, n, c, h, w, f));
}
void conv3x3_grad_k(double* dk, const double* dy, const double* x, int n, int c, int h, int w,
                    int f, const unsigned char* skip) {
    SCOTTI_DISPATCH(conv3x3_grad_k(dk, dy, x, n, c, h, w, f, skip));
}
void conv3x3_grad_b(double* db, const double* dy, int n, int f, int oh, int ow,
                    const unsigned char* skip) {
    SCOTTI_DISPATCH(conv3x3_grad_b(db, dy, n, f, oh, ow, skip));
}
double softmax_xent_fwd(const double* logits, const int* labels, int rows, int classes,
                        double* probs) {
    SCOTTI_DISPATCH(softmax_xent_fwd(logits, labels, rows, classes, probs));
}
void softmax_xent_bwd(double* dlogits, const double* logits, const int* labels, int rows,
                      int classes, double upstream) {
    SCOTTI_DISPATCH(softmax_xent_bwd(dlogits, logits, labels, rows, classes, upstream));
}

#undef SCOTTI_DISPATCH

}  // namespace scotti::kernels
