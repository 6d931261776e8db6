#pragma once

#include "sprox/problem.hpp"

#include "json.hpp"

#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace sprox {

using json = nlohmann::json;

namespace detail {

inline json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

/// Bounds serialize infinities as null.
inline json bounds_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) out.push_back(v[i]);
    else out.push_back(nullptr);
  }
  return out;
}

inline json matrix_to_json(const Matrix& M) {
  json out = json::array();
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) out.push_back(M(i, j));
  return out;
}

inline void io_require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::io, what);
}

inline Vector vector_from_json(const json& j, Index expected, const std::string& name) {
  io_require(j.is_array(), "field '" + name + "' must be an array");
  io_require(static_cast<Index>(j.size()) == expected,
             "field '" + name + "' has length " + std::to_string(j.size()) + ", expected " +
                 std::to_string(expected));
  Vector v(expected);
  for (Index i = 0; i < expected; ++i) {
    io_require(j[i].is_number(), "field '" + name + "' holds a non-number");
    v[i] = j[i].get<double>();
  }
  return v;
}

inline Vector bounds_from_json(const json& j, Index expected, double missing, const std::string& name) {
  io_require(j.is_array() && static_cast<Index>(j.size()) == expected,
             "field '" + name + "' must be an array of length " + std::to_string(expected));
  Vector v(expected);
  for (Index i = 0; i < expected; ++i) {
    if (j[i].is_null()) v[i] = missing;
    else {
      io_require(j[i].is_number(), "field '" + name + "' holds a non-number");
      v[i] = j[i].get<double>();
    }
  }
  return v;
}

inline Matrix matrix_from_json(const json& j, Index rows, Index cols, const std::string& name) {
  Vector flat = vector_from_json(j, rows * cols, name);
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) M(i, k) = flat[i * cols + k];
  return M;
}

inline Index index_field(const json& j, const char* name) {
  io_require(j.contains(name) && j[name].is_number_integer() && j[name].get<long long>() >= 0,
             std::string("missing or invalid integer field '") + name + "'");
  return static_cast<Index>(j[name].get<long long>());
}

inline const json& field(const json& j, const char* name) {
  io_require(j.contains(name), std::string("missing field '") + name + "'");
  return j.at(name);
}

}  // namespace detail

/// Problem file schema: n, m, l, Q (row-major), q, offset, A (row-major), b,
/// polyhedron {type: "box", lo, hi} | {type: "general", G, h}, L_f,
/// f_lower (optional), f_lower_kind (optional), meta {seed, x_feas}.
/// Infinite box bounds are written as null.
inline json problem_to_json(const QpInstance& inst) {
  json j;
  j["n"] = inst.n();
  j["m"] = inst.m();
  j["l"] = inst.l();
  j["Q"] = detail::matrix_to_json(inst.objective.Q);
  j["q"] = detail::vector_to_json(inst.objective.q);
  j["offset"] = inst.objective.offset;
  j["A"] = detail::matrix_to_json(inst.A);
  j["b"] = detail::vector_to_json(inst.b);
  if (inst.polyhedron.is_box()) {
    const Box& box = inst.polyhedron.as_box();
    j["polyhedron"] = {{"type", "box"}, {"lo", detail::bounds_to_json(box.lo)},
                       {"hi", detail::bounds_to_json(box.hi)}};
  } else {
    const Halfspaces& hs = inst.polyhedron.as_general();
    j["polyhedron"] = {{"type", "general"}, {"G", detail::matrix_to_json(hs.G)},
                       {"h", detail::vector_to_json(hs.h)}};
  }
  j["L_f"] = inst.lipschitz_grad;
  if (inst.lower_bound) {
    j["f_lower"] = inst.lower_bound->value;
    j["f_lower_kind"] = to_string(inst.lower_bound->kind);
  }
  json meta = json::object();
  if (inst.meta.seed) meta["seed"] = *inst.meta.seed;
  if (inst.meta.x_feas) meta["x_feas"] = detail::vector_to_json(*inst.meta.x_feas);
  j["meta"] = meta;
  return j;
}

inline QpInstance problem_from_json(const json& j) {
  using namespace detail;
  io_require(j.is_object(), "problem must be a JSON object");
  const Index n = index_field(j, "n");
  const Index m = index_field(j, "m");
  io_require(n > 0, "n must be positive");

  QpInstance inst;
  inst.objective.Q = matrix_from_json(field(j, "Q"), n, n, "Q");
  inst.objective.q = vector_from_json(field(j, "q"), n, "q");
  inst.objective.offset = j.contains("offset") ? j["offset"].get<double>() : 0.0;
  inst.A = matrix_from_json(field(j, "A"), m, n, "A");
  inst.b = vector_from_json(field(j, "b"), m, "b");

  const json& poly = field(j, "polyhedron");
  const std::string type = field(poly, "type").get<std::string>();
  const double inf = std::numeric_limits<double>::infinity();
  if (type == "box") {
    inst.polyhedron = Polyhedron::box(bounds_from_json(field(poly, "lo"), n, -inf, "lo"),
                                      bounds_from_json(field(poly, "hi"), n, inf, "hi"));
  } else if (type == "general") {
    const Index l = index_field(j, "l");
    inst.polyhedron = Polyhedron::general(matrix_from_json(field(poly, "G"), l, n, "G"),
                                          vector_from_json(field(poly, "h"), l, "h"));
  } else {
    throw Error(ErrorKind::io, "unknown polyhedron type '" + type + "'");
  }
  if (j.contains("l"))
    io_require(index_field(j, "l") == inst.l(), "field 'l' disagrees with the polyhedron");

  io_require(field(j, "L_f").is_number(), "L_f must be a number");
  inst.lipschitz_grad = j["L_f"].get<double>();
  if (j.contains("f_lower") && !j["f_lower"].is_null()) {
    LowerBound lb{j["f_lower"].get<double>(), LowerBoundKind::estimate};
    if (j.contains("f_lower_kind") && j["f_lower_kind"] == "certified") lb.kind = LowerBoundKind::certified;
    inst.lower_bound = lb;
  }
  if (j.contains("meta")) {
    const json& meta = j["meta"];
    if (meta.contains("seed")) inst.meta.seed = meta["seed"].get<std::uint64_t>();
    if (meta.contains("x_feas")) inst.meta.x_feas = vector_from_json(meta["x_feas"], n, "x_feas");
  }
  return inst;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, "'" + path + "': " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

/// Shape errors inside the file surface as ErrorKind::io.
inline QpInstance read_problem(const std::string& path) {
  json j = read_json_file(path);
  try {
    return problem_from_json(j);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, "'" + path + "': " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    throw Error(ErrorKind::io, "'" + path + "': " + e.what());
  }
}

inline void write_problem(const std::string& path, const QpInstance& inst) {
  write_json_file(path, problem_to_json(inst));
}

/// Linear system file: n, C1 (row-major, rows m1), b1, C2 (row-major, rows m2),
/// b2, optional theta.
inline LinearSystem linear_system_from_json(const json& j) {
  using namespace detail;
  const Index n = index_field(j, "n");
  const Index m1 = j.contains("b1") ? static_cast<Index>(field(j, "b1").size()) : 0;
  const Index m2 = j.contains("b2") ? static_cast<Index>(field(j, "b2").size()) : 0;
  LinearSystem sys;
  sys.C1 = m1 ? matrix_from_json(field(j, "C1"), m1, n, "C1") : Matrix(0, n);
  sys.b1 = m1 ? vector_from_json(field(j, "b1"), m1, "b1") : Vector(0);
  sys.C2 = m2 ? matrix_from_json(field(j, "C2"), m2, n, "C2") : Matrix(0, n);
  sys.b2 = m2 ? vector_from_json(field(j, "b2"), m2, "b2") : Vector(0);
  return sys;
}

inline json linear_system_to_json(const LinearSystem& sys) {
  json j;
  j["n"] = sys.dim();
  j["C1"] = detail::matrix_to_json(sys.C1);
  j["b1"] = detail::vector_to_json(sys.b1);
  j["C2"] = detail::matrix_to_json(sys.C2);
  j["b2"] = detail::vector_to_json(sys.b2);
  return j;
}

}  // namespace sprox
