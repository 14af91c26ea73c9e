#pragma once

// JSON encoding of measures, densities, curves and explicit matrices.
// Complex numbers are [re, im] (a bare number is read as real). Unknown keys
// are rejected; every error is a ConfigError naming the offending field.

#include <string>

#include <json.hpp>

#include "momidx/hermitian_core.hpp"
#include "momidx/measures.hpp"

namespace momidx {

using Json = nlohmann::json;

Complex complex_from_json(const Json& j, const std::string& path);
Json complex_to_json(Complex z);

DensitySpec density_from_json(const Json& j, const std::string& path);
Json density_to_json(const DensitySpec& d);

CurveFamily curve_from_json(const Json& j, const std::string& path);
Json curve_to_json(const CurveFamily& c);

MeasureSpec measure_from_json(const Json& j, const std::string& path);
Json measure_to_json(const MeasureSpec& m);

/// {"entries": [[z00, z01, ...], ...]}: a square Hermitian matrix.
HermitianSection matrix_from_json(const Json& j, const std::string& path);
Json matrix_to_json(const ComplexMatrix& m);

/// Throws ConfigError when `j` has a key outside `allowed`.
void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& path);

double number_from_json(const Json& j, const std::string& path);
std::size_t count_from_json(const Json& j, const std::string& path);

}  // namespace momidx
