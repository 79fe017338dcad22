#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace partfn {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/** Returned by connection_distance when no chain of terms links the regions. */
inline constexpr int kUnreachable = std::numeric_limits<int>::max();

struct Site {
    int index = 0;
    std::optional<std::vector<int>> coords;
};

/**
 * One local term H_X: an ordered list of distinct site indices and a
 * Hermitian matrix of dimension d^{|support|}. Site support[0] is the most
 * significant digit of the matrix index.
 */
struct LocalTerm {
    std::vector<int> support;
    Matrix matrix;
};

/**
 * Data-dependent locality profile.
 *
 *   kappa  max support size
 *   R      max support diameter under the coordinate metric (inf without coords)
 *   g      max over sites of sum_{X : x in X} ||H_X|| / h
 *   h      max over terms of ||H_X|| (spectral norm)
 *   m      number of terms
 */
struct GeometryParams {
    int kappa = 0;
    double R = std::numeric_limits<double>::infinity();
    double g = 0.0;
    double h = 0.0;
    int m = 0;
};

/**
 * A local Hamiltonian H = sum_X H_X on n qudits of dimension d.
 *
 * Construction validates supports (in range, distinct, sorted), matrix
 * dimensions and Hermiticity (||M - M^dag||_F <= 1e-12 ||M||_F).
 */
class LocalHamiltonian {
  public:
    LocalHamiltonian(int n, int d, std::vector<Site> sites, std::vector<LocalTerm> terms);

    int n() const { return n_; }
    int d() const { return d_; }
    const std::vector<Site>& sites() const { return sites_; }
    const std::vector<LocalTerm>& terms() const { return terms_; }
    bool has_coords() const;

    /** True when every term matrix is real (imaginary parts below 1e-14). */
    bool is_real() const;

    /** Canonical JSON text; parse(serialize()) reproduces every matrix bit for bit. */
    std::string serialize() const;

    static LocalHamiltonian parse(const std::string& text);
    static LocalHamiltonian parse_file(const std::string& path);

  private:
    int n_ = 0;
    int d_ = 2;
    std::vector<Site> sites_;
    std::vector<LocalTerm> terms_;
};

/** Thrown on malformed instance input; the CLI maps it to its own exit code. */
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

GeometryParams geometry_params(const LocalHamiltonian& H);

/**
 * Restriction to a sublattice: keeps the sites in `region` and the terms whose
 * support lies inside it. Site indices are preserved unless reindex is true,
 * in which case they are compacted to 0..|region|-1 in ascending order.
 */
LocalHamiltonian restricted(const LocalHamiltonian& H, const std::vector<int>& region,
                            bool reindex = true);

/**
 * Deterministic random instance from a seed. Kinds:
 *   "chain"   nearest-neighbour ZZ couplings plus X fields, coords [i]
 *   "grid2d"  rows x cols grid (rows = largest divisor <= sqrt(n)), ZZ + X fields
 *   "graph"   sparse random graph, ZZ + X fields, no coords
 * All couplings are drawn uniformly from [lo, hi]; d = 2.
 */
LocalHamiltonian random_instance(const std::string& kind, int n, double lo, double hi,
                                 std::uint64_t seed);

/**
 * Least L such that some sequence of L terms has pairwise-chained supports,
 * the first intersecting A and the last intersecting B; kUnreachable if none.
 */
int connection_distance(const LocalHamiltonian& H, const std::vector<int>& A,
                        const std::vector<int>& B);

/** Tensor product of single-qubit Paulis, e.g. "ZZ" or "XIY"; d = 2 only. */
Matrix pauli_string_matrix(const std::string& s);

/**
 * Embed an operator acting on sites `support` (ascending) into the register
 * `target` (ascending, support subset of target); qudit dimension d.
 */
Matrix embed_operator(const Matrix& op, const std::vector<int>& support,
                      const std::vector<int>& target, int d);

/** Dense d^n x d^n sum of all terms. Refuses dimensions above dim_cap. */
Matrix dense_hamiltonian(const LocalHamiltonian& H, long dim_cap = 1 << 14);

/** Spectral norm of a Hermitian matrix (largest |eigenvalue|). */
double spectral_norm(const Matrix& M);

/** FNV-1a 64 hash of the canonical serialization, as 16 hex digits. */
std::string instance_hash(const LocalHamiltonian& H);

/** Uniform double in [0,1) from the top 53 bits of a mt19937_64 draw. */
double uniform01(std::uint64_t word);

}  // namespace partfn
