#pragma once

#include "asympode/dynamics.hpp"
#include "asympode/expansion.hpp"
#include "asympode/exponents.hpp"
#include "asympode/spectral.hpp"
#include "asympode/tensors.hpp"
#include "asympode/termlang.hpp"

#include <json.hpp>

#include <string>

namespace asympode {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

Json to_json(const Rational& r);
Rational rational_from_json(const Json& j);
Json to_json(const Vec& v);
Vec vec_from_json(const Json& j);
Json to_json(const Mat& m);
/// Coefficient columns c_0..c_D, each a d-vector.
Json to_json(const VectorPolynomial& p);
VectorPolynomial polynomial_from_json(const Json& j, int dim);

Json to_json(const SpectralData& sd);
Json to_json(const ExponentLattice& lattice);
ExponentLattice lattice_from_json(const Json& j);
Json to_json(const ExpansionSeries& series);
ExpansionSeries series_from_json(const Json& j);
Json to_json(const FirstApproximation& fa);
FirstApproximation first_approximation_from_json(const Json& j);
Json to_json(const DecayBoundsReport& r);
Json to_json(const SmoothnessReport& r);
Json to_json(const Classification& c);
Json to_json(const DerivativeTensor& t);

/// Columns t, y_1..y_d, |y|, dirichlet_quotient, preceded by `#` metadata lines.
std::string trajectory_csv(const Trajectory& traj);
Trajectory trajectory_from_csv(const std::string& text);

/// Throws IoFailure.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);
Json read_json(const std::string& path);

}  // namespace asympode
