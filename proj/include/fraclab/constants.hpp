#pragma once

#include <cmath>

#include "fraclab/geometry.hpp"

namespace fraclab {

// Constants attached to the fractional Laplacian of order a in dimension n.
//
// Two normalizations of the ball Green kernel are carried side by side:
//   c_tilde = a * kappa_n fixes the boundary trace limit of the kernel at
//     kappa_n (1-|x|^2)^a / |x-omega|^n;
//   c_green = Gamma(n/2) / (4^a pi^{n/2} Gamma(a)^2) is the normalization for
//     which the same kernel inverts (-Delta)^a with zero exterior condition,
//     pinned by the torsion identity int_B G(x,z) dz = (1-|x|^2)^a / torsion.
// Their ratio is c_tilde / c_green = 4^a Gamma(a) Gamma(1+a) / 2.
struct KernelConstants {
  double kappa_n;        // 1 / (n * unit-ball volume) = Gamma(n/2) / (2 pi^{n/2})
  double c_tilde;        // a * kappa_n
  double frac_constant;  // |C_{n,a}| = a 4^a Gamma(n/2+a) / (pi^{n/2} Gamma(1-a))
  double gamma_factor;   // Gamma(a) Gamma(1+a)
  double c_green;        // Gamma(n/2) / (4^a pi^{n/2} Gamma(a)^2)
  double torsion;        // (-Delta)^a (1-|x|^2)_+^a on the unit ball:
                         //   4^a Gamma(n/2+a) Gamma(1+a) / Gamma(n/2)
  double a = 0.0;
  int n = 2;

  static KernelConstants make(FractionalOrder order, int dim = 2) {
    require(dim == 1 || dim == 2, "invalid-dimension", "constants support n in {1,2}");
    const double a = order.a;
    const double hn = 0.5 * dim;
    const double pow4a = std::pow(4.0, a);
    const double pin = std::pow(pi, hn);
    KernelConstants c;
    c.a = a;
    c.n = dim;
    c.kappa_n = std::tgamma(hn) / (2.0 * pin);
    c.c_tilde = a * c.kappa_n;
    c.frac_constant = a * pow4a * std::tgamma(hn + a) / (pin * std::tgamma(1.0 - a));
    c.gamma_factor = std::tgamma(a) * std::tgamma(1.0 + a);
    c.c_green = std::tgamma(hn) / (pow4a * pin * std::tgamma(a) * std::tgamma(a));
    c.torsion = pow4a * std::tgamma(hn + a) * std::tgamma(1.0 + a) / std::tgamma(hn);
    return c;
  }

  // Factor converting the c_tilde-normalized kernel into the inverting one.
  double inversion_scale() const { return c_green / c_tilde; }
};

}  // namespace fraclab
