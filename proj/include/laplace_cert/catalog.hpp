#pragma once

#include <map>
#include <string>
#include <vector>

#include "laplace_cert/model.hpp"

namespace lc {

/// Raw key/value parameters for a catalog problem. Scalars broadcast:
/// a vector parameter given as one number fills every component, a matrix
/// parameter given as one number means that multiple of the identity.
/// Vectors are comma separated; matrix rows are separated by ';'.
using CatalogParams = std::map<std::string, std::string>;

/// Builds one of the reference problems:
///
///   linear_gaussian      G(x) = A x, Gaussian noise and prior.
///                        keys: d, A, eps, y, m0, sigma0
///   perturbed_linear     G(x) = A x + tau F(x) with F a RadialBump,
///                        Gaussian noise and prior.
///                        keys: d, A, tau, eps, y, m0, sigma0,
///                              bump_amp, bump_center, bump_width
///   scalar_bimodal_demo  1-D G(x) = amp atan(x / scale); a skewed
///                        posterior for density plots.
///                        keys: amp, scale, eps, y, m0, sigma0
///   cauchy_noise_linear  G(x) = A x with standard Cauchy noise and either
///                        a flat (default) or Gaussian prior.
///                        keys: d, A, eps, y, prior (flat|gaussian), m0, sigma0
///
/// Unknown names or keys and malformed values throw ParameterError.
InverseProblem catalog(const std::string& name, const CatalogParams& params = {});

const std::vector<std::string>& catalog_names();

/// Parsing helpers shared with the config reader.
double parse_scalar(const std::string& text, const std::string& key);
Eigen::VectorXd parse_vector(const std::string& text, int d, const std::string& key);
Eigen::MatrixXd parse_matrix(const std::string& text, int d, const std::string& key);

}  // namespace lc
