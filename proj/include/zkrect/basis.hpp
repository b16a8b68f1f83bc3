#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace zkrect {

// Lateral boundary condition in y.
enum class BcCase { DirichletDirichlet, NeumannNeumann, DirichletNeumann, Periodic };

BcCase parse_case(std::string_view tag);  // "a".."d"
char case_tag(BcCase c);

struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::size_t size() const { return nodes.size(); }
};

Quadrature gauss_legendre(int m, double lo, double hi);
Quadrature periodic_trapezoid(int m, double L);

// Eigenfunctions of -d^2/dy^2 on [0,L]. Index k stores mode l = k + 1.
struct EigenSystem {
    BcCase bc = BcCase::DirichletDirichlet;
    double L = 1.0;
    int n_modes = 0;
    std::vector<double> lambda;
    Quadrature quad;
    Eigen::MatrixXd table;  // psi_k at quad nodes, n_modes x nodes

    double psi(int k, double y) const;
    double dpsi(int k, double y) const;
    double d2psi(int k, double y) const;

    // n_modes x y.size()
    Eigen::MatrixXd values(const std::vector<double>& y) const;
    Eigen::MatrixXd derivs(const std::vector<double>& y) const;

    // Same family of rule with more nodes, for products of fields.
    Quadrature product_quadrature(double factor = 1.5) const;
};

EigenSystem eigen_system(BcCase bc, double L, int n_modes);

Eigen::VectorXd project(const Eigen::VectorXd& samples, const EigenSystem& sys);
Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs, const EigenSystem& sys,
                           const std::vector<double>& y);

}  // namespace zkrect
