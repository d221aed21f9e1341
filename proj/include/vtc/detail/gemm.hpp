#pragma once

#include <cstddef>

namespace vtc::detail {

// Small accumulating matmul kernels. All three keep a fixed per-element
// accumulation order over the contraction index, so results are bitwise
// reproducible for a given binary regardless of thread count.

/// C(MxN) += A(MxK) * B(KxN)
template <typename T>
inline void gemm_nn(int M, int N, int K, const T* a, const T* b, T* c) {
#pragma omp parallel for schedule(static) if (static_cast<long long>(M) * N * K > (1 << 15))
    for (int m = 0; m < M; ++m) {
        T* crow = c + static_cast<std::size_t>(m) * N;
        const T* arow = a + static_cast<std::size_t>(m) * K;
        for (int k = 0; k < K; ++k) {
            const T av = arow[k];
            const T* brow = b + static_cast<std::size_t>(k) * N;
            for (int n = 0; n < N; ++n) crow[n] += av * brow[n];
        }
    }
}

/// C(MxN) += A(KxM)^T * B(KxN)
template <typename T>
inline void gemm_tn(int M, int N, int K, const T* a, const T* b, T* c) {
#pragma omp parallel for schedule(static) if (static_cast<long long>(M) * N * K > (1 << 15))
    for (int m = 0; m < M; ++m) {
        T* crow = c + static_cast<std::size_t>(m) * N;
        for (int k = 0; k < K; ++k) {
            const T av = a[static_cast<std::size_t>(k) * M + m];
            const T* brow = b + static_cast<std::size_t>(k) * N;
            for (int n = 0; n < N; ++n) crow[n] += av * brow[n];
        }
    }
}

/// C(MxN) += A(MxK) * B(NxK)^T
/// The contraction runs over fixed lanes so the dot products vectorize
/// without reassociation and stay order-deterministic.
template <typename T>
inline void gemm_nt(int M, int N, int K, const T* a, const T* b, T* c) {
    constexpr int kLanes = 16;
#pragma omp parallel for schedule(static) if (static_cast<long long>(M) * N * K > (1 << 15))
    for (int m = 0; m < M; ++m) {
        const T* arow = a + static_cast<std::size_t>(m) * K;
        T* crow = c + static_cast<std::size_t>(m) * N;
        for (int n = 0; n < N; ++n) {
            const T* brow = b + static_cast<std::size_t>(n) * K;
            T lanes[kLanes] = {};
            int k = 0;
            for (; k + kLanes <= K; k += kLanes) {
                for (int j = 0; j < kLanes; ++j) lanes[j] += arow[k + j] * brow[k + j];
            }
            T acc = T(0);
            for (; k < K; ++k) acc += arow[k] * brow[k];
            for (int j = 0; j < kLanes; ++j) acc += lanes[j];
            crow[n] += acc;
        }
    }
}

} // namespace vtc::detail
