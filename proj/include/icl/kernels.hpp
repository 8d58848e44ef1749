#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace icl {

enum class ExecMode { serial, parallel };

// Score assigned to masked attention entries. float runs use a large finite
// negative so the subtraction trick stays in range; double runs use exact
// -inf so masked keys contribute literal zeros.
template <typename T>
constexpr T masked_score();
template <>
constexpr float masked_score<float>() {
    return -1e9f;
}
template <>
constexpr double masked_score<double>() {
    return -std::numeric_limits<double>::infinity();
}

// Reference kernels: plain loops, no threading. The parallel namespace
// mirrors these with OpenMP pragmas over the row dimension only, so each
// output element is produced by exactly one thread with the same inner loop
// and results match the reference bit for bit at any thread count.
namespace ref {

// y[r,o] = sum_i x[r,i] * w[o*d_in + i]; w is row-major [d_out, d_in]
template <typename T>
void linear(const T* x, int rows, int d_in, const float* w, int d_out, T* y);

// RMS norm with learned gain, no bias
template <typename T>
void rmsnorm(const T* x, int rows, int d, const float* g, T eps, T* y);

template <typename T>
void gelu(T* x, size_t n);

template <typename T>
void add(T* a, const T* b, size_t n);

// In-place rotary position embedding over [rows, heads*head_dim]; row index
// is the absolute position.
template <typename T>
void rope(T* x, int rows, int heads, int head_dim);

// Multi-head scaled dot-product attention with an optional visibility
// matrix. allowed is row-major [n, n] (nonzero = key visible); null means
// plain causal. trace, when given, receives softmax rows as double,
// [heads, n, n] with zeros above the diagonal.
template <typename T>
void attention(const T* q, const T* k, const T* v, int n, int heads, int head_dim,
               const uint8_t* allowed, T* out, double* trace);

}  // namespace ref

namespace par {

template <typename T>
void linear(const T* x, int rows, int d_in, const float* w, int d_out, T* y);

template <typename T>
void rmsnorm(const T* x, int rows, int d, const float* g, T eps, T* y);

template <typename T>
void gelu(T* x, size_t n);

template <typename T>
void add(T* a, const T* b, size_t n);

template <typename T>
void rope(T* x, int rows, int heads, int head_dim);

template <typename T>
void attention(const T* q, const T* k, const T* v, int n, int heads, int head_dim,
               const uint8_t* allowed, T* out, double* trace);

}  // namespace par

}  // namespace icl
