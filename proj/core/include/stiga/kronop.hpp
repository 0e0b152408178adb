#pragma once

#include <variant>
#include <vector>

#include "stiga/types.hpp"

namespace stiga {

/// Flat tensor in the colexicographic layout shared by all modules:
/// the linear index of entry (i_1,...,i_D) is
///   i_1 + i_2*n_1 + i_3*n_1*n_2 + ...   (0-based),
/// i.e. the first index runs fastest and vec() of a matrix stacks columns.
struct Tensor {
    Vector data;
    std::vector<Index> dims;

    Index size() const { return data.size(); }
};

/// Square or rectangular Kronecker factor, stored dense or sparse and applied
/// through a common contraction interface.
class KronFactor {
public:
    KronFactor(DenseMatrix m) : m_(std::move(m)) {}
    KronFactor(SparseMatrix m) : m_(std::move(m)) {}

    Index rows() const;
    Index cols() const;
    bool is_sparse() const { return std::holds_alternative<SparseMatrix>(m_); }
    /// Diagonal of the factor (factors must be square for this call).
    Vector diagonal() const;
    const DenseMatrix& dense() const { return std::get<DenseMatrix>(m_); }
    const SparseMatrix& sparse() const { return std::get<SparseMatrix>(m_); }

    /// out(left x rows) = x(left x cols) * this^T, the kernel of mode_product.
    void contract(const Eigen::Map<const DenseMatrix>& x, Eigen::Map<DenseMatrix> out) const;
    /// out(rows x right) = this * x(cols x right), used for the first mode.
    void apply_left(const Eigen::Map<const DenseMatrix>& x, Eigen::Map<DenseMatrix> out) const;

private:
    std::variant<DenseMatrix, SparseMatrix> m_;
};

/// m-mode product X x_m J: contracts mode `mode` (0-based) of X with the rows
/// of J, replacing dimension n_mode by J.rows().
Tensor mode_product(const Tensor& x, const KronFactor& J, int mode);

/// (J_D (x) ... (x) J_1) vec(X) computed by chained mode products; the dense
/// Kronecker product is never formed. factors[l] acts on mode l.
Vector kron_matvec(const std::vector<KronFactor>& factors, const Vector& x);

/// One term coeff * (factors[D-1] (x) ... (x) factors[0]) of a Kronecker sum.
struct KronTerm {
    double coeff;
    std::vector<KronFactor> factors;
};

/// Sum of Kronecker products held as factors and applied matrix-free.
/// All terms share the mode dimensions (n_1,...,n_D); factors are square.
class KronSumOperator {
public:
    KronSumOperator(std::vector<Index> dims, std::vector<KronTerm> terms);

    const std::vector<Index>& dims() const { return dims_; }
    Index size() const { return n_dof_; }
    const std::vector<KronTerm>& terms() const { return terms_; }

    /// y = sum_t coeff_t (kron of factors_t) x
    Vector apply(const Vector& x) const;

    /// diag(A) = sum_t coeff_t (x)_l diag(factor_{t,l}), without forming A.
    Vector diagonal() const;

private:
    std::vector<Index> dims_;
    std::vector<KronTerm> terms_;
    Index n_dof_;
};

} // namespace stiga
