#pragma once

#include "pfl/field.hpp"
#include "pfl/potential.hpp"

namespace pfl {

// Normalizing constant 2 sqrt(2) / 3 of the diffuse area.
double c0();

// Discrete Laplacian per node. Nodes on Dirichlet faces report 0; NeumannZero
// faces use a mirrored ghost node and Free faces a one-sided stencil.
ScalarField laplacian(const ScalarField& u);

// Per-cell densities. mu integrates to the diffuse area, alpha to the diffuse
// Willmore energy. Both are cell values to be multiplied by the cell volume.
struct DensityFields {
  CellField mu;
  CellField alpha;
};
DensityFields density_fields(const ScalarField& u, double eps,
                             const Potential& p = Potential::standard());

double modica_mortola(const ScalarField& u, double eps, const Potential& p = Potential::standard());
double willmore_eps(const ScalarField& u, double eps, const Potential& p = Potential::standard());

// Unscaled energy: integral of |grad u|^2 / 2 + W(u).
double half_space_energy(const ScalarField& u, const Potential& p = Potential::standard());
// Integral of |grad u|^2 using the same edge quadrature.
double dirichlet_energy(const ScalarField& u);

struct EnergyBreakdown {
  double eps = 0.0;
  double sigma = 0.0;
  double s_target = 0.0;
  double s_eps = 0.0;
  double w_eps = 0.0;
  double e_eps = 0.0;
  double penalty = 0.0;
  double f_eps = 0.0;
};

// W_eps + eps^{-sigma} (S_eps - S)^2 with its parts.
EnergyBreakdown energy_breakdown(const ScalarField& u, double eps, double sigma, double s_target,
                                 const Potential& p = Potential::standard());
double penalized_functional(const ScalarField& u, double eps, double sigma, double s_target,
                            const Potential& p = Potential::standard());

}  // namespace pfl
