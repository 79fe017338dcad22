#pragma once

#include "partfn/hamiltonian.hpp"
#include "partfn/series.hpp"

#include <cstddef>
#include <memory>
#include <vector>

namespace partfn {

/** Thrown when a configured resource limit would be exceeded. */
class CapError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct MomentOptions {
    int k_max = 64;                      // largest admissible moment order
    std::size_t matrix_cap = std::size_t(1) << 20;  // entries of the largest dense block
    std::size_t region_budget = std::size_t(1) << 22;  // enumerated support unions
    std::size_t enum_budget = 10'000'000;  // tuple leaves of the reference enumeration
    int threads = 0;                     // 0: PARTFN_THREADS env, then hardware
};

/** Effective thread count: PARTFN_THREADS wins, then requested > 0, then hardware. */
int resolve_threads(int requested);

/**
 * Exact trace moments of a local Hamiltonian without touching the full
 * d^n-dimensional space.
 *
 * Tr[H^k] = sum over ordered k-tuples of terms of Tr[H_{X_1} ... H_{X_k}].
 * Grouping tuples by the exact support union of their connected components
 * turns the sum into a convolution of per-region exponential generating
 * functions. Regions are support unions grown from an anchor site; their
 * series are assembled from dense eigensolves on each active sub-union
 * (dimension d^{|V|}, bounded by matrix_cap) via inclusion-exclusion, and a
 * lattice recursion stitches regions into the full trace. Eigensolves are
 * distributed over threads; results do not depend on the thread count.
 */
class MomentEngine {
  public:
    MomentEngine(const LocalHamiltonian& H, int K, MomentOptions opts = {});
    ~MomentEngine();
    MomentEngine(MomentEngine&&) noexcept;
    MomentEngine& operator=(MomentEngine&&) noexcept;

    int order() const;

    /** Tr[H^k], k <= order(). Real for Hermitian terms. */
    double trace_moment(int k);

    /** Series of Tr[e^{-beta H}] in beta: a_k = (-1)^k Tr[H^k] / k!. */
    PowerSeries z_series();

    /** Tr[H^k O_1 ... O_r] with the observables applied last. */
    Complex weighted_trace_moment(int k, const std::vector<LocalTerm>& obs);

    /** Series of Tr[e^{-beta H} O_1 ... O_r] in beta. */
    PowerSeries weighted_series(const std::vector<LocalTerm>& obs);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

double trace_moment(const LocalHamiltonian& H, int k, const MomentOptions& opts = {});
PowerSeries z_series(const LocalHamiltonian& H, int K, const MomentOptions& opts = {});
Complex weighted_trace_moment(const LocalHamiltonian& H, int k,
                              const std::vector<LocalTerm>& obs,
                              const MomentOptions& opts = {});

/**
 * Reference evaluation of Tr[H^k]: a depth-first walk over all m^k ordered
 * term tuples, factoring each tuple into connected components whose partial
 * traces are memoized, with compensated accumulation. Exponential in k; the
 * production path above must agree with it to 1e-10 and is checked against
 * it in the test suite.
 */
Complex trace_moment_enumerated(const LocalHamiltonian& H, int k,
                                const MomentOptions& opts = {});

/** Reference evaluation of Tr[H^k O_1 ... O_r] by the same walk. */
Complex weighted_trace_moment_enumerated(const LocalHamiltonian& H, int k,
                                         const std::vector<LocalTerm>& obs,
                                         const MomentOptions& opts = {});

}  // namespace partfn
