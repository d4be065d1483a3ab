#pragma once

#include <Eigen/Dense>
#include <vector>

#include "kam/cohomology.hpp"
#include "kam/series.hpp"

namespace kam {

/// Tangent vector to the normal-form space: constant plus O(r^2).
struct TangentForm {
    double c_dot = 0.0;
    Series K2_dot;
};

/// Lie algebra element (R_dot, S_dot, phi_dot). It acts as the vector field
/// theta' = phi_dot(theta), r' = rho_dot(theta) - r . phi_dot'(theta) with
/// rho_dot = R_dot + grad S_dot.
struct LieElement {
    std::vector<double> R_dot;
    Series S_dot;
    std::vector<Series> phi_dot;

    static LieElement zero(int dim, int kmax);
    int dim() const { return static_cast<int>(R_dot.size()); }
    Series rho_dot(int j) const;
    LieElement scaled(double t) const;
    /// max(|rho_dot_j|_s, |phi_dot_j|_s) in the majorant norm.
    double norm(double s) const;
    void validate() const;
};

/// Hamiltonian c + alpha.r + r^T Q(theta) r + tail, tail = O(r^3).
class KolmogorovForm {
public:
    KolmogorovForm(double c, Frequency freq, std::vector<std::vector<Series>> Q, Series tail);

    /// Reads a series that must already have the normal-form shape: no
    /// non-constant r^0 part and an r^1 part equal to alpha within tol.
    static KolmogorovForm from_series(const Series& K, const Frequency& freq, double tol = 1e-12);

    int dim() const { return freq_.dim(); }
    double c() const { return c_; }
    const Frequency& freq() const { return freq_; }
    const Series& Q(int i, int j) const { return Q_[i][j]; }
    const Series& tail() const { return tail_; }
    int kmax() const { return tail_.kmax(); }
    int mmax() const { return tail_.mmax(); }

    Series assemble() const;
    Eigen::MatrixXd average_Q() const;
    KolmogorovForm plus(const TangentForm& dk) const;

private:
    double c_;
    Frequency freq_;
    std::vector<std::vector<Series>> Q_;
    Series tail_;
};

struct Decomposition {
    Series H0;               // r^0 part (theta-series)
    std::vector<Series> H1;  // coefficient of r_j (theta-series)
    Series rest;             // |m| >= 2 part
};

Decomposition decompose(const Series& H);

struct NondegeneracyCheck {
    double det = 0.0;
    bool ok = false;
};

/// det of the theta-average of Q; ok when |det| clears the floor and, if a
/// reference determinant is given, half of it.
NondegeneracyCheck check_nondegeneracy(const KolmogorovForm& K, double reference_det = 0.0,
                                       double floor = 1e-8);

/// Infinitesimal action H' . G_dot of a Lie element on any series.
Series lie_action(const Series& H, const LieElement& gdot, double tail_s = 0.0,
                  double* tail_norm = nullptr);

Series directional_derivative(const KolmogorovForm& K, const LieElement& gdot);

struct LinearizedSolution {
    TangentForm kdot;
    LieElement gdot;
    double second_average = 0.0;  // theta-average fed to the second solve
    double condition = 0.0;       // condition number of <Q>
    double tail_norm = 0.0;       // discarded product mass
};

/// Solves K_dot + K' . G_dot = H_dot through first order in r by the
/// triangular system; K2_dot absorbs everything of order >= 2.
LinearizedSolution solve_linearized(const KolmogorovForm& K, const Series& hdot,
                                    double tail_s = 0.0);

/// Majorant norm at s of K_dot + K' . G_dot - H_dot.
double linearized_residual(const KolmogorovForm& K, const Series& hdot, const TangentForm& kdot,
                           const LieElement& gdot, double s);

}  // namespace kam
