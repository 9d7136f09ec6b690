#pragma once
#ifndef CTCLAB_JSON_IO_HPP
#define CTCLAB_JSON_IO_HPP

// JSON codecs for the library's value types.
//
// Complex matrices serialize as
//   { "rows": r, "cols": c, "data": [[re, im], ...] }
// with the entries flattened in row-major order.  Doubles go through the
// serializer's shortest round-trip representation, so write -> parse -> read
// reproduces every value bit for bit.  All decode failures (malformed JSON,
// missing keys, shape mismatches) surface as io_error; semantic validation
// (unitarity, normalization, ...) is re-run by the constructed objects.

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ctclab/common.hpp"
#include "ctclab/correlations.hpp"
#include "ctclab/dctc.hpp"
#include "ctclab/linalg.hpp"
#include "ctclab/politzer.hpp"

namespace ctclab::json_io {

using json = nlohmann::json;

inline json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw io_error(std::string("invalid JSON: ") + e.what());
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

namespace detail {

inline const json& member(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw io_error(std::string("missing JSON member '") + key + "'");
  return j.at(key);
}

inline double number(const json& j, const char* what) {
  if (!j.is_number())
    throw io_error(std::string("expected a number for ") + what);
  return j.get<double>();
}

inline long integer(const json& j, const char* what) {
  if (!j.is_number_integer())
    throw io_error(std::string("expected an integer for ") + what);
  return j.get<long>();
}

inline std::vector<double> real_array(const json& j, const char* what) {
  if (!j.is_array())
    throw io_error(std::string("expected an array for ") + what);
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(number(v, what));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Matrices and vectors.
// ---------------------------------------------------------------------------

inline json matrix_to_json(const CMat& m) {
  json data = json::array();
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j)
      data.push_back({m(i, j).real(), m(i, j).imag()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline CMat matrix_from_json(const json& j) {
  const long rows = detail::integer(detail::member(j, "rows"), "rows");
  const long cols = detail::integer(detail::member(j, "cols"), "cols");
  if (rows <= 0 || cols <= 0)
    throw io_error("matrix dimensions must be positive");
  if (rows > kDimensionCap || cols > kDimensionCap)
    throw io_error("matrix dimensions exceed the supported cap");
  const json& data = detail::member(j, "data");
  if (!data.is_array() ||
      data.size() != static_cast<size_t>(rows) * static_cast<size_t>(cols))
    throw io_error("matrix data length does not match rows*cols");
  CMat m(rows, cols);
  size_t k = 0;
  for (long i = 0; i < rows; ++i)
    for (long c = 0; c < cols; ++c, ++k) {
      const json& entry = data.at(k);
      if (!entry.is_array() || entry.size() != 2)
        throw io_error("matrix entries must be [re, im] pairs");
      m(i, c) = cplx(detail::number(entry.at(0), "matrix entry"),
                     detail::number(entry.at(1), "matrix entry"));
    }
  return m;
}

inline json vector_to_json(const CVec& v) {
  return matrix_to_json(CMat(v));
}

inline CVec vector_from_json(const json& j) {
  const CMat m = matrix_from_json(j);
  if (m.cols() != 1) throw io_error("expected a column vector (cols == 1)");
  return CVec(m.col(0));
}

// ---------------------------------------------------------------------------
// Channel: joint unitary plus the reservoir state on factor A.
// ---------------------------------------------------------------------------

inline json channel_to_json(const dctc::CtcChannel& ch) {
  return {{"dimA", ch.space.dimA},
          {"dimB", ch.space.dimB},
          {"unitary", matrix_to_json(ch.U.mat())},
          {"stateA", matrix_to_json(ch.rhoA.mat())}};
}

inline dctc::CtcChannel channel_from_json(const json& j) {
  const long dimA = detail::integer(detail::member(j, "dimA"), "dimA");
  const long dimB = detail::integer(detail::member(j, "dimB"), "dimB");
  try {
    BipartiteSpace space(dimA, dimB);
    UnitaryOperator u(matrix_from_json(detail::member(j, "unitary")));
    DensityMatrix rhoA(matrix_from_json(detail::member(j, "stateA")));
    return dctc::CtcChannel(space, std::move(u), std::move(rhoA));
  } catch (const io_error&) {
    throw;
  } catch (const contract_error& e) {
    throw io_error(std::string("channel payload rejected: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Correlation instance: tripartite state vector and a factor-12 interaction.
// ---------------------------------------------------------------------------

inline json instance_to_json(const correlations::CorrelationInstance& inst) {
  return {{"dims", {inst.dims.d1, inst.dims.d2, inst.dims.d3}},
          {"state", vector_to_json(inst.psi)},
          {"interaction", matrix_to_json(inst.u12)}};
}

inline correlations::CorrelationInstance instance_from_json(const json& j) {
  const json& dims = detail::member(j, "dims");
  if (!dims.is_array() || dims.size() != 3)
    throw io_error("'dims' must be an array of three integers");
  try {
    correlations::TripartiteDims d(
        detail::integer(dims.at(0), "dims[0]"),
        detail::integer(dims.at(1), "dims[1]"),
        detail::integer(dims.at(2), "dims[2]"));
    CVec psi = vector_from_json(detail::member(j, "state"));
    CMat u = matrix_from_json(detail::member(j, "interaction"));
    return correlations::CorrelationInstance(d, std::move(psi),
                                             std::move(u));
  } catch (const io_error&) {
    throw;
  } catch (const contract_error& e) {
    throw io_error(std::string("instance payload rejected: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Strip-spacetime fields and regions.
// ---------------------------------------------------------------------------

inline json profile_to_json(const politzer::MoverProfile& p) {
  return {{"knots", p.knots()}, {"values", p.values()},
          {"slopes", p.slopes()}};
}

inline politzer::MoverProfile profile_from_json(const json& j) {
  auto knots = detail::real_array(detail::member(j, "knots"), "knots");
  auto values = detail::real_array(detail::member(j, "values"), "values");
  auto slopes = detail::real_array(detail::member(j, "slopes"), "slopes");
  if (knots.empty() && values.empty() && slopes.empty())
    return politzer::MoverProfile{};
  try {
    return politzer::MoverProfile(std::move(knots), std::move(values),
                                  std::move(slopes));
  } catch (const contract_error& e) {
    throw io_error(std::string("profile payload rejected: ") + e.what());
  }
}

inline json geometry_to_json(const politzer::Geometry& g) {
  return {{"tau", g.tau},
          {"halfLength", g.halfLength},
          {"criticalTol", g.criticalTol}};
}

inline politzer::Geometry geometry_from_json(const json& j) {
  try {
    return politzer::Geometry(
        detail::number(detail::member(j, "tau"), "tau"),
        detail::number(detail::member(j, "halfLength"), "halfLength"),
        j.contains("criticalTol")
            ? detail::number(j.at("criticalTol"), "criticalTol")
            : 1e-6);
  } catch (const io_error&) {
    throw;
  } catch (const contract_error& e) {
    throw io_error(std::string("geometry payload rejected: ") + e.what());
  }
}

inline json field_to_json(const politzer::PolitzerField& f) {
  return {{"geometry", geometry_to_json(f.geom)},
          {"initialTime", f.t0},
          {"rightMover", profile_to_json(f.xiR)},
          {"leftMover", profile_to_json(f.xiL)}};
}

inline politzer::PolitzerField field_from_json(const json& j) {
  politzer::Geometry g = geometry_from_json(detail::member(j, "geometry"));
  try {
    return politzer::PolitzerField(
        g, detail::number(detail::member(j, "initialTime"), "initialTime"),
        profile_from_json(detail::member(j, "rightMover")),
        profile_from_json(detail::member(j, "leftMover")));
  } catch (const io_error&) {
    throw;
  } catch (const contract_error& e) {
    throw io_error(std::string("field payload rejected: ") + e.what());
  }
}

inline json region_to_json(const politzer::SpacetimeRegion& r) {
  return {{"time", r.time}, {"xlo", r.xlo}, {"xhi", r.xhi}};
}

inline politzer::SpacetimeRegion region_from_json(const json& j) {
  try {
    return politzer::SpacetimeRegion(
        detail::number(detail::member(j, "time"), "time"),
        detail::number(detail::member(j, "xlo"), "xlo"),
        detail::number(detail::member(j, "xhi"), "xhi"));
  } catch (const io_error&) {
    throw;
  } catch (const contract_error& e) {
    throw io_error(std::string("region payload rejected: ") + e.what());
  }
}

}  // namespace ctclab::json_io

#endif  // CTCLAB_JSON_IO_HPP
