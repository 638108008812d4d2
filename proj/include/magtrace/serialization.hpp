#pragma once

#include "magtrace/convergence.hpp"
#include "magtrace/kernel_calculus.hpp"
#include "magtrace/operator_algebra.hpp"
#include "magtrace/spectral_dos.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace magtrace {

using Json = nlohmann::json;

/// {"entries": [{"j", "k", "re", "im"}, ...], "class": "L1"|"L2"|"Itau"}
CoefficientOperator operator_from_json(Json const& doc);
Json operator_to_json(CoefficientOperator const& a);
CoefficientOperator load_operator(std::string const& path);

/// {"nodes": [[eps, value], ...]}
CompactTestFunction test_function_from_json(Json const& doc);
CompactTestFunction load_test_function(std::string const& path);

/// Sorted keys, no whitespace, doubles at 17 significant digits, non-finite
/// numbers as null. Parsing the output and dumping again gives the same bytes.
std::string canonical_dump(Json const& doc);

/// Complex numbers serialize as [re, im].
Json complex_to_json(Complex z);
Json table_to_json(ConvergenceTable const& table);
/// Columns param, raw_re, raw_im, accelerated_re, accelerated_im,
/// extrapolated_re, extrapolated_im, residual.
void write_table_csv(std::ostream& out, ConvergenceTable const& table);
/// Columns x1, x2, re, im.
void write_grid_csv(std::ostream& out, GridFunction const& f);

} // namespace magtrace
