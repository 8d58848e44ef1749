#include "icl/kernels.hpp"

#include <cmath>
#include <vector>

namespace icl {

namespace {

template <typename T>
inline void linear_row(const T* x, int d_in, const float* w, int d_out, T* y) {
    for (int o = 0; o < d_out; ++o) {
        T acc = 0;
        const float* wr = w + (size_t)o * d_in;
        for (int i = 0; i < d_in; ++i) acc += x[i] * (T)wr[i];
        y[o] = acc;
    }
}

template <typename T>
inline void rmsnorm_row(const T* x, int d, const float* g, T eps, T* y) {
    T ms = 0;
    for (int i = 0; i < d; ++i) ms += x[i] * x[i];
    T scale = (T)1 / std::sqrt(ms / (T)d + eps);
    for (int i = 0; i < d; ++i) y[i] = x[i] * scale * (T)g[i];
}

template <typename T>
inline void rope_row(T* x, int pos, int heads, int head_dim) {
    for (int h = 0; h < heads; ++h) {
        T* v = x + (size_t)h * head_dim;
        for (int i = 0; i < head_dim / 2; ++i) {
            T theta = (T)pos * std::pow((T)10000, (T)(-2.0 * i / head_dim));
            T c = std::cos(theta), s = std::sin(theta);
            T a = v[2 * i], b = v[2 * i + 1];
            v[2 * i] = a * c - b * s;
            v[2 * i + 1] = a * s + b * c;
        }
    }
}

// one query row, all heads
template <typename T>
inline void attention_row(const T* q, const T* k, const T* v, int n, int heads, int head_dim,
                          const uint8_t* allowed, int qi, T* out, double* trace) {
    const int d = heads * head_dim;
    const T inv_sqrt = (T)1 / std::sqrt((T)head_dim);
    std::vector<T> scores(qi + 1);
    for (int h = 0; h < heads; ++h) {
        const T* qv = q + (size_t)qi * d + (size_t)h * head_dim;
        T max_s = masked_score<T>();
        for (int j = 0; j <= qi; ++j) {
            T s;
            if (allowed && !allowed[(size_t)qi * n + j]) {
                s = masked_score<T>();
            } else {
                const T* kv = k + (size_t)j * d + (size_t)h * head_dim;
                T dot = 0;
                for (int i = 0; i < head_dim; ++i) dot += qv[i] * kv[i];
                s = dot * inv_sqrt;
            }
            scores[j] = s;
            if (s > max_s) max_s = s;
        }
        T denom = 0;
        for (int j = 0; j <= qi; ++j) {
            scores[j] = std::exp(scores[j] - max_s);
            denom += scores[j];
        }
        T* ov = out + (size_t)qi * d + (size_t)h * head_dim;
        for (int i = 0; i < head_dim; ++i) ov[i] = 0;
        for (int j = 0; j <= qi; ++j) {
            T w = scores[j] / denom;
            if (trace) trace[((size_t)h * n + qi) * n + j] = (double)w;
            const T* vv = v + (size_t)j * d + (size_t)h * head_dim;
            for (int i = 0; i < head_dim; ++i) ov[i] += w * vv[i];
        }
    }
}

}  // namespace

namespace ref {

template <typename T>
void linear(const T* x, int rows, int d_in, const float* w, int d_out, T* y) {
    for (int r = 0; r < rows; ++r)
        linear_row(x + (size_t)r * d_in, d_in, w, d_out, y + (size_t)r * d_out);
}

template <typename T>
void rmsnorm(const T* x, int rows, int d, const float* g, T eps, T* y) {
    for (int r = 0; r < rows; ++r) rmsnorm_row(x + (size_t)r * d, d, g, eps, y + (size_t)r * d);
}

template <typename T>
void gelu(T* x, size_t n) {
    for (size_t i = 0; i < n; ++i)
        x[i] = (T)0.5 * x[i] * ((T)1 + std::erf(x[i] / std::sqrt((T)2)));
}

template <typename T>
void add(T* a, const T* b, size_t n) {
    for (size_t i = 0; i < n; ++i) a[i] += b[i];
}

template <typename T>
void rope(T* x, int rows, int heads, int head_dim) {
    for (int r = 0; r < rows; ++r) rope_row(x + (size_t)r * heads * head_dim, r, heads, head_dim);
}

template <typename T>
void attention(const T* q, const T* k, const T* v, int n, int heads, int head_dim,
               const uint8_t* allowed, T* out, double* trace) {
    for (int qi = 0; qi < n; ++qi)
        attention_row(q, k, v, n, heads, head_dim, allowed, qi, out, trace);
}

template void linear<float>(const float*, int, int, const float*, int, float*);
template void linear<double>(const double*, int, int, const float*, int, double*);
template void rmsnorm<float>(const float*, int, int, const float*, float, float*);
template void rmsnorm<double>(const double*, int, int, const float*, double, double*);
template void gelu<float>(float*, size_t);
template void gelu<double>(double*, size_t);
template void add<float>(float*, const float*, size_t);
template void add<double>(double*, const double*, size_t);
template void rope<float>(float*, int, int, int);
template void rope<double>(double*, int, int, int);
template void attention<float>(const float*, const float*, const float*, int, int, int,
                               const uint8_t*, float*, double*);
template void attention<double>(const double*, const double*, const double*, int, int, int,
                                const uint8_t*, double*, double*);

}  // namespace ref

namespace par {

template <typename T>
void linear(const T* x, int rows, int d_in, const float* w, int d_out, T* y) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r)
        linear_row(x + (size_t)r * d_in, d_in, w, d_out, y + (size_t)r * d_out);
}

template <typename T>
void rmsnorm(const T* x, int rows, int d, const float* g, T eps, T* y) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) rmsnorm_row(x + (size_t)r * d, d, g, eps, y + (size_t)r * d);
}

template <typename T>
void gelu(T* x, size_t n) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)n; ++i)
        x[i] = (T)0.5 * x[i] * ((T)1 + std::erf(x[i] / std::sqrt((T)2)));
}

template <typename T>
void add(T* a, const T* b, size_t n) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)n; ++i) a[i] += b[i];
}

template <typename T>
void rope(T* x, int rows, int heads, int head_dim) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) rope_row(x + (size_t)r * heads * head_dim, r, heads, head_dim);
}

template <typename T>
void attention(const T* q, const T* k, const T* v, int n, int heads, int head_dim,
               const uint8_t* allowed, T* out, double* trace) {
#pragma omp parallel for schedule(static)
    for (int qi = 0; qi < n; ++qi)
        attention_row(q, k, v, n, heads, head_dim, allowed, qi, out, trace);
}

template void linear<float>(const float*, int, int, const float*, int, float*);
template void linear<double>(const double*, int, int, const float*, int, double*);
template void rmsnorm<float>(const float*, int, int, const float*, float, float*);
template void rmsnorm<double>(const double*, int, int, const float*, double, double*);
template void gelu<float>(float*, size_t);
template void gelu<double>(double*, size_t);
template void add<float>(float*, const float*, size_t);
template void add<double>(double*, const double*, size_t);
template void rope<float>(float*, int, int, int);
template void rope<double>(double*, int, int, int);
template void attention<float>(const float*, const float*, const float*, int, int, int,
                               const uint8_t*, float*, double*);
template void attention<double>(const double*, const double*, const double*, int, int, int,
                                const uint8_t*, double*, double*);

}  // namespace par

}  // namespace icl
