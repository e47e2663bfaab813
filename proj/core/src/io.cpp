#include "tflat/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "tflat/error.hpp"

namespace tflat {

namespace {

std::string entry_text(const Json& e) {
  if (e.is_string()) return e.get<std::string>();
  if (e.is_number()) return e.dump();
  throw ParseError("matrix entries must be numbers or strings");
}

// Nested JSON arrays to the literal syntax understood by parse_matrix.
std::string literal(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return j.dump();
  if (!j.is_array() || j.empty()) throw ParseError("expected a matrix as nested arrays");
  std::string s = "[";
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (r) s += ",";
    if (!j[r].is_array()) throw ParseError("matrix rows must be arrays");
    s += "[";
    for (std::size_t c = 0; c < j[r].size(); ++c) {
      if (c) s += ",";
      s += entry_text(j[r][c]);
    }
    s += "]";
  }
  return s + "]";
}

ParsedMatrix parse_vector(const Json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("expected a vector");
  Json row = Json::array();
  row.push_back(j);
  ParsedMatrix p = parse_matrix(literal(row));
  return p;
}

Json rational_json(const Rational& q) {
  if (q.get_den() == 1 && abs(q.get_num()) < Integer(1L << 52)) return Json(q.get_num().get_si());
  return Json(to_string(q));
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Parallelepiped piece_from_json(const Json& p) {
  if (p.contains("box")) {
    const ParsedMatrix lo = parse_vector(p.at("box").at("lo"));
    const ParsedMatrix hi = parse_vector(p.at("box").at("hi"));
    const int d = static_cast<int>(lo.real.cols());
    if (hi.real.cols() != d) throw ParseError("box bounds differ in length");
    if (lo.exact && hi.exact) {
      RationalVector o(static_cast<std::size_t>(d));
      RationalMatrix m(d, d);
      for (int a = 0; a < d; ++a) {
        o[static_cast<std::size_t>(a)] = (*lo.exact)(0, a);
        m(a, a) = (*hi.exact)(0, a) - (*lo.exact)(0, a);
      }
      return Parallelepiped(o, m);
    }
    const Eigen::VectorXd o = lo.real.row(0).transpose();
    return Parallelepiped(o, Eigen::MatrixXd((hi.real.row(0).transpose() - o).asDiagonal()));
  }
  const ParsedMatrix off = parse_vector(p.at("offset"));
  const ParsedMatrix mat = parse_matrix(literal(p.at("matrix")));
  if (off.exact && mat.exact) {
    RationalVector o;
    for (int a = 0; a < off.exact->cols(); ++a) o.push_back((*off.exact)(0, a));
    return Parallelepiped(o, *mat.exact);
  }
  return Parallelepiped(Eigen::VectorXd(off.real.row(0).transpose()), mat.real);
}

}  // namespace

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) { return parse_matrix(literal(j)).real; }

Json generator_to_json(const GeneratorMatrix& m) {
  if (!m.is_exact()) return matrix_to_json(m.real());
  const RationalMatrix& q = *m.exact();
  Json rows = Json::array();
  for (int r = 0; r < q.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < q.cols(); ++c) row.push_back(rational_json(q(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

GeneratorMatrix generator_from_json(const Json& j) { return GeneratorMatrix::from_parsed(parse_matrix(literal(j))); }

Json lattice_to_json(const TFLattice& l) {
  Json j;
  j["A"] = generator_to_json(l.A);
  j["B"] = generator_to_json(l.B);
  if (l.D) j["D"] = matrix_to_json(*l.D);
  j["density"] = l.density();
  return j;
}

// ---- regions ---------------------------------------------------------------------------

Json region_to_json(const Region& r) {
  if (!r.has_pieces()) throw UnsupportedError("grid-only regions have no JSON form");
  Json j;
  j["dim"] = r.dim();
  Json pieces = Json::array();
  for (const auto& p : r.pieces()) {
    Json pj;
    if (p.is_exact()) {
      Json off = Json::array();
      for (const auto& q : *p.exact_offset()) off.push_back(rational_json(q));
      pj["offset"] = off;
      pj["matrix"] = generator_to_json(GeneratorMatrix(*p.exact_matrix()));
    } else {
      pj["offset"] = vector_json(p.offset());
      pj["matrix"] = matrix_to_json(p.matrix());
    }
    pieces.push_back(std::move(pj));
  }
  j["pieces"] = std::move(pieces);
  j["measure"] = r.measure();
  return j;
}

Region region_from_json(const Json& j) {
  try {
    std::vector<Parallelepiped> pieces;
    if (j.contains("pieces")) {
      for (const auto& p : j.at("pieces")) pieces.push_back(piece_from_json(p));
    } else {
      pieces.push_back(piece_from_json(j));
    }
    if (pieces.empty()) throw ParseError("region has no pieces");
    const int d = pieces.front().dim();
    if (j.contains("dim") && j.at("dim").get<int>() != d) throw ParseError("region dim disagrees with its pieces");
    return Region(d, std::move(pieces));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("region JSON: ") + e.what());
  }
}

// ---- windows ---------------------------------------------------------------------------

std::string interpolation_name(Interpolation i) {
  switch (i) {
    case Interpolation::cell:
      return "cell";
    case Interpolation::linear:
      return "linear";
    case Interpolation::cubic:
      break;
  }
  return "cubic";
}

Interpolation interpolation_from_name(const std::string& s) {
  if (s == "cell") return Interpolation::cell;
  if (s == "linear") return Interpolation::linear;
  if (s == "cubic") return Interpolation::cubic;
  throw ParseError("unknown interpolation '" + s + "'");
}

Json window_to_json(const SampledWindow& g) {
  Json j;
  j["lo"] = vector_json(g.lo());
  j["h"] = g.h();
  j["count"] = g.count();
  j["interpolation"] = interpolation_name(g.interpolation());
  Json re = Json::array(), im = Json::array();
  for (const auto& v : g.values()) re.push_back(v.real());
  j["re"] = std::move(re);
  if (!g.is_real()) {
    for (const auto& v : g.values()) im.push_back(v.imag());
    j["im"] = std::move(im);
  }
  j["meta"] = g.meta;
  return j;
}

SampledWindow window_from_json(const Json& j, double h) {
  try {
    if (!j.contains("recipe")) {
      const auto count = j.at("count").get<std::vector<long>>();
      SampledWindow g(vector_from_json(j.at("lo")), j.at("h").get<double>(), count,
                      interpolation_from_name(j.value("interpolation", std::string("cubic"))));
      const auto& re = j.at("re");
      if (re.size() != g.size()) throw ParseError("window sample count disagrees with its grid");
      const bool has_im = j.contains("im");
      if (has_im && j.at("im").size() != g.size()) throw ParseError("window sample count disagrees with its grid");
      for (std::size_t f = 0; f < g.size(); ++f)
        g[f] = Complex(re[f].get<double>(), has_im ? j.at("im")[f].get<double>() : 0.0);
      if (j.contains("meta")) g.meta = j.at("meta");
      return g;
    }
    if (!(h > 0)) h = j.value("h", 1.0 / 256);
    const std::string recipe = j.at("recipe").get<std::string>();
    if (recipe == "indicator") return indicator_window(region_from_json(j.at("region")), h);
    if (recipe == "smooth") return smooth_window(region_from_json(j.at("region")), j.at("eps").get<double>(), h);
    if (recipe == "plateau") {
      const auto in = j.at("inner").get<std::pair<double, double>>();
      const auto out = j.at("outer").get<std::pair<double, double>>();
      return plateau_window_1d(in, out, h);
    }
    if (recipe == "bump") return bump_window(vector_from_json(j.at("center")), j.at("radius").get<double>(), h);
    if (recipe == "tensor") {
      const auto& f = j.at("factors");
      if (f.size() != 2) throw ParseError("tensor recipe needs two factors");
      return tensor_window(window_from_json(f[0], h), window_from_json(f[1], h));
    }
    throw ParseError("unknown window recipe '" + recipe + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("window JSON: ") + e.what());
  }
}

// ---- reports ---------------------------------------------------------------------------

Json cover_to_json(const CoverReport& r) {
  Json j;
  j["verdict"] = r.verdict_name();
  if (r.verdict == CoverReport::Verdict::k_fold_tiling || r.verdict == CoverReport::Verdict::tiling) j["k"] = r.k;
  j["min_cover"] = r.min_cover;
  j["max_cover"] = r.max_cover;
  j["raw_min_cover"] = r.raw_min_cover;
  j["raw_max_cover"] = r.raw_max_cover;
  j["defect_measure"] = r.defect_measure;
  if (r.exact_defect) j["exact_defect"] = to_string(*r.exact_defect);
  j["mode"] = r.mode == CoverMode::exact ? "exact" : "float";
  j["fell_back"] = r.fell_back;
  if (!r.warning.empty()) j["warning"] = r.warning;
  j["h"] = r.h;
  j["tol"] = r.tol;
  j["samples"] = r.samples;
  Json hist = Json::object();
  for (const auto& [cover, measure] : r.histogram) hist[std::to_string(cover)] = measure;
  j["histogram"] = std::move(hist);
  return j;
}

// ---- files -----------------------------------------------------------------------------

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_pgm(const std::string& path, const SampledWindow& g) {
  if (g.dim() != 2) throw PreconditionError("PGM output needs a two-dimensional window");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  const long w = g.count()[0], ht = g.count()[1];
  double top = 0;
  for (const auto& v : g.values()) top = std::max(top, std::abs(v));
  out << "P5\n" << w << ' ' << ht << "\n255\n";
  // first image row is the largest y
  for (long y = ht - 1; y >= 0; --y)
    for (long x = 0; x < w; ++x) {
      const double v = top > 0 ? std::abs(g[static_cast<std::size_t>(x + y * w)]) / top : 0.0;
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255 * v))));
    }
}

void write_csv(const std::string& path, const SampledWindow& g) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << std::setprecision(17);
  for (int a = 0; a < g.dim(); ++a) out << 'x' << a << ',';
  out << "re,im\n";
  for (std::size_t f = 0; f < g.size(); ++f) {
    const Eigen::VectorXd p = g.node(f);
    for (int a = 0; a < g.dim(); ++a) out << p(a) << ',';
    out << g[f].real() << ',' << g[f].imag() << '\n';
  }
}

}  // namespace tflat
