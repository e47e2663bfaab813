#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

#include "tflat/tflat.hpp"

#ifndef TFLAT_VERSION
#define TFLAT_VERSION "unknown"
#endif

namespace tflat::cli {

void JobConfig::validate() const {
  if (h && !(*h > 0)) throw PreconditionError("--h must be positive");
  if (tol && !(*tol > 0)) throw PreconditionError("--tol must be positive");
  if (samples && *samples <= 0) throw PreconditionError("--samples must be positive");
  if (truncation && !(*truncation > 0)) throw PreconditionError("--truncation must be positive");
}

namespace {

std::string mode_name(Mode m) { return m == Mode::exact ? "exact" : "float"; }

/// What a handler hands back: the result block, and whether the property asked about holds.
struct Outcome {
  Json result;
  bool certified = false;
  std::string status;
};

/// One run of one subcommand. Defaults resolved here are recorded under "config".
class Job {
 public:
  explicit Job(JobConfig c) : cfg(std::move(c)) {}

  JobConfig cfg;
  Json inputs = Json::object();
  Json used = Json::object();

  double h(double fallback) {
    const double v = cfg.h.value_or(fallback);
    used["h"] = v;
    return v;
  }
  double tol(double fallback) {
    const double v = cfg.tol.value_or(fallback);
    used["tol"] = v;
    return v;
  }
  int samples(int fallback) {
    const int v = cfg.samples.value_or(fallback);
    used["samples"] = v;
    return v;
  }
  /// Exact when the inputs allow it, unless --mode says otherwise.
  Mode mode(bool inputs_exact) {
    if (cfg.mode == Mode::exact && !inputs_exact)
      throw PreconditionError("--mode exact needs rational inputs");
    const Mode m = cfg.mode.value_or(inputs_exact ? Mode::exact : Mode::floating);
    used["mode"] = mode_name(m);
    return m;
  }
  void require_exact_if_asked(bool inputs_exact) {
    if (cfg.mode == Mode::exact && !inputs_exact) throw PreconditionError("--mode exact needs rational inputs");
    used["mode"] = mode_name(cfg.mode.value_or(Mode::floating));
  }
};

double parse_number(const std::string& text, const std::string& what) {
  try {
    return parse_rational(text).get_d();
  } catch (const ParseError&) {
    throw ParseError(what + ": not a number: '" + text + "'");
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::pair<double, double> parse_interval(const std::string& text, const std::string& what) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw ParseError(what + ": expected 'lo,hi', got '" + text + "'");
  return {parse_number(parts[0], what), parse_number(parts[1], what)};
}

Eigen::VectorXd parse_point(const std::string& text, const std::string& what) {
  const auto parts = split(text, ',');
  Eigen::VectorXd p(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) p(static_cast<Eigen::Index>(i)) = parse_number(parts[i], what);
  return p;
}

GeneratorMatrix parse_generator(const std::string& text, const std::string& what) {
  try {
    return GeneratorMatrix::parse(text);
  } catch (const ParseError& e) {
    throw ParseError(what + ": " + e.what());
  }
}

/// "a,b" is aZ x bZ, "a,b,c,d" is diag(a,b)Z^2 x diag(c,d)Z^2, and "A;B" takes two matrix literals.
TFLattice parse_lattice(const std::string& text, const std::string& d_text) {
  GeneratorMatrix a = GeneratorMatrix::identity(1), b = GeneratorMatrix::identity(1);
  if (text.find(';') != std::string::npos) {
    const auto parts = split(text, ';');
    if (parts.size() != 2) throw ParseError("--lattice: expected 'A;B'");
    a = parse_generator(parts[0], "--lattice A");
    b = parse_generator(parts[1], "--lattice B");
  } else {
    const auto parts = split(text, ',');
    if (parts.size() == 2) {
      a = parse_generator(parts[0], "--lattice a");
      b = parse_generator(parts[1], "--lattice b");
    } else if (parts.size() == 4) {
      a = parse_generator("[[" + parts[0] + ",0],[0," + parts[1] + "]]", "--lattice");
      b = parse_generator("[[" + parts[2] + ",0],[0," + parts[3] + "]]", "--lattice");
    } else {
      throw ParseError("--lattice: expected 'a,b', 'a,b,c,d' or 'A;B', got '" + text + "'");
    }
  }
  if (a.dim() != b.dim()) throw ParseError("--lattice: A and B differ in size");
  std::optional<Eigen::MatrixXd> d;
  if (!d_text.empty()) {
    d = parse_matrix(d_text).real;
    if (d->rows() != a.dim() || d->cols() != a.dim()) throw ParseError("--D: wrong size");
  }
  return TFLattice(std::move(a), std::move(b), std::move(d));
}

bool lattice_exact(const TFLattice& l) { return l.A.is_exact() && l.B.is_exact() && !l.D; }

Region load_region(const std::string& path, Job& job) {
  const Json j = read_json_file(path);
  job.inputs["region"] = j;
  return region_from_json(j);
}

/// A window file is either a window (samples or recipe) or a report whose result carries samples.
SampledWindow load_window(const std::string& path, const std::string& key, Job& job) {
  Json j = read_json_file(path);
  if (j.contains("result") && j["result"].contains("samples")) j = j["result"]["samples"];
  SampledWindow g = window_from_json(j, job.cfg.h.value_or(0));
  Json echo;
  echo["path"] = path;
  if (j.contains("recipe")) echo["recipe"] = j;
  echo["h"] = g.h();
  echo["count"] = g.count();
  echo["interpolation"] = interpolation_name(g.interpolation());
  echo["meta"] = g.meta;
  job.inputs[key] = std::move(echo);
  return g;
}

Json box_to_json(const Box& b) {
  Json lo = Json::array(), hi = Json::array();
  for (int i = 0; i < b.dim(); ++i) {
    lo.push_back(b.lo(i));
    hi.push_back(b.hi(i));
  }
  return Json{{"lo", lo}, {"hi", hi}};
}

Json window_summary(const SampledWindow& g) {
  Json s;
  s["dim"] = g.dim();
  s["h"] = g.h();
  s["count"] = g.count();
  s["interpolation"] = interpolation_name(g.interpolation());
  s["norm2"] = g.norm2();
  s["real"] = g.is_real();
  s["support_box"] = box_to_json(g.support_box());
  s["support_certified"] = g.support_certified();
  s["max_gradient"] = max_gradient(g);
  return s;
}

void side_outputs(const Job& job, const SampledWindow& g) {
  if (!job.cfg.pgm.empty()) write_pgm(job.cfg.pgm, g);
  if (!job.cfg.csv.empty()) write_csv(job.cfg.csv, g);
}

// ---- lattice

struct LatticeArgs {
  std::string lattice;
  std::string d;
  std::string matrix;
};

Outcome lattice_density(Job& job, const LatticeArgs& a) {
  Outcome o;
  if (!a.matrix.empty()) {
    const GeneratorMatrix m = parse_generator(a.matrix, "--matrix");
    job.inputs["matrix"] = generator_to_json(m);
    job.require_exact_if_asked(m.is_exact());
    o.result["density"] = density(m);
    if (const auto q = exact_density(m)) o.result["exact_density"] = to_string(*q);
  } else {
    const TFLattice l = parse_lattice(a.lattice, a.d);
    job.inputs["lattice"] = lattice_to_json(l);
    job.require_exact_if_asked(lattice_exact(l));
    o.result["density"] = l.density();
    if (l.separable())
      if (const auto q = exact_density(l.as_separable())) o.result["exact_density"] = to_string(*q);
  }
  o.certified = true;
  o.status = "ok";
  return o;
}

Outcome lattice_dual(Job& job, const LatticeArgs& a) {
  const GeneratorMatrix m = parse_generator(a.matrix, "--matrix");
  job.inputs["matrix"] = generator_to_json(m);
  job.require_exact_if_asked(m.is_exact());
  Outcome o;
  o.result["dual"] = generator_to_json(dual(m));
  o.certified = true;
  o.status = "ok";
  return o;
}

Outcome lattice_adjoint(Job& job, const LatticeArgs& a) {
  const TFLattice l = parse_lattice(a.lattice, a.d);
  job.inputs["lattice"] = lattice_to_json(l);
  if (!l.separable()) throw UnsupportedError("the adjoint lattice needs D = 0");
  job.require_exact_if_asked(lattice_exact(l));
  const SeparableTFLattice adj = adjoint_separable(l.as_separable());
  Outcome o;
  o.result["adjoint"] = lattice_to_json(adj);
  o.result["density"] = density(adj);
  o.certified = true;
  o.status = "ok";
  return o;
}

Outcome lattice_symplectic(Job& job, const LatticeArgs& a) {
  const ParsedMatrix p = parse_matrix(a.matrix);
  job.inputs["matrix"] = a.matrix;
  const Mode mode = job.mode(p.exact.has_value());
  if (p.real.rows() != p.real.cols() || p.real.rows() % 2 != 0)
    throw PreconditionError("--matrix must be square of even size");
  Outcome o;
  bool ok;
  if (mode == Mode::exact) {
    ok = is_symplectic(*p.exact);
  } else {
    ok = is_symplectic(p.real, job.tol(1e-10));
  }
  o.result["symplectic"] = ok;
  o.certified = ok;
  o.status = ok ? "symplectic" : "not symplectic";
  return o;
}

// ---- cover

struct CoverArgs {
  std::string region;
  std::string lattice;
  int fourier_k = 8;
  std::string expect = "tiling";
};

Outcome cover(Job& job, const CoverArgs& a) {
  const Region omega = load_region(a.region, job);
  const GeneratorMatrix m = parse_generator(a.lattice, "--lattice");
  job.inputs["lattice"] = generator_to_json(m);
  job.inputs["expect"] = a.expect;
  if (omega.dim() != m.dim()) throw PreconditionError("region and lattice differ in dimension");

  const Mode mode = job.mode(omega.is_exact() && m.is_exact());
  const double h = job.h(default_step(m));
  const double tol = job.tol(1e-9);
  const CoverReport r = cover_classify(omega, m, h, tol, mode == Mode::exact ? CoverMode::exact : CoverMode::floating);

  Outcome o;
  o.result["cover"] = cover_to_json(r);
  if (omega.has_pieces() && a.fourier_k > 0) {
    const FourierCheck f = fourier_tiling_check(omega, m, a.fourier_k);
    Json fj;
    fj["K"] = a.fourier_k;
    fj["max_residual"] = f.max_residual;
    fj["evaluated"] = f.evaluated;
    Json arg = Json::array();
    for (Eigen::Index i = 0; i < f.argmax.size(); ++i) arg.push_back(f.argmax(i));
    fj["argmax"] = std::move(arg);
    o.result["fourier"] = std::move(fj);
  }

  using V = CoverReport::Verdict;
  if (a.expect == "tiling")
    o.certified = r.verdict == V::tiling;
  else if (a.expect == "packing")
    o.certified = r.verdict == V::tiling || r.verdict == V::packing;
  else
    o.certified = r.verdict == V::tiling || r.verdict == V::k_fold_tiling;
  o.status = r.verdict_name();
  return o;
}

// ---- build-domain

struct CommonArgs {
  int m = 1;
  int n = 2;
  std::string variant = "upper";
};

Outcome build_common(Job& job, const CommonArgs& a) {
  job.inputs["m"] = a.m;
  job.inputs["n"] = a.n;
  job.inputs["variant"] = a.variant;
  const CommonDomain cd = common_fd_rational(a.m, a.n, a.variant == "lower" ? FdVariant::lower : FdVariant::upper);
  const Mode mode = job.mode(true);
  const double tol = job.tol(1e-9);

  Outcome o;
  o.result["region"] = region_to_json(cd.omega);
  Json lattices = Json::array();
  bool all = true;
  for (const auto& l : cd.lattices) {
    const CoverReport r = cover_classify(cd.omega, l, job.h(default_step(l)), tol,
                                         mode == Mode::exact ? CoverMode::exact : CoverMode::floating);
    all = all && r.verdict == CoverReport::Verdict::tiling;
    lattices.push_back(Json{{"generator", generator_to_json(l)}, {"cover", cover_to_json(r)}});
  }
  // the step differs per lattice; each cover block carries its own
  job.used.erase("h");
  o.result["lattices"] = std::move(lattices);
  o.certified = all;
  o.status = all ? "common fundamental domain" : "not a common fundamental domain";
  return o;
}

struct ScaledArgs {
  std::string a;
  std::string b;
  std::string region;
  std::string center;
  int iterations = 12;
};

Outcome build_scaled(Job& job, const ScaledArgs& s) {
  const GeneratorMatrix a = parse_generator(s.a, "--A");
  const GeneratorMatrix b = parse_generator(s.b, "--B");
  job.inputs["A"] = generator_to_json(a);
  job.inputs["B"] = generator_to_json(b);
  const Region omega = load_region(s.region, job);
  job.require_exact_if_asked(a.is_exact() && b.is_exact() && omega.is_exact());
  Eigen::VectorXd center;
  if (!s.center.empty()) {
    center = parse_point(s.center, "--center");
  } else {
    const auto c = omega.exact_centroid();
    center = c ? to_real(*c) : omega.centroid();
  }
  Json cj = Json::array();
  for (Eigen::Index i = 0; i < center.size(); ++i) cj.push_back(center(i));
  job.inputs["center"] = std::move(cj);
  job.inputs["iterations"] = s.iterations;

  const ScaledDomain sd = scaled_common_domain(a, b, omega, center, job.h(1.0 / 256), s.iterations);
  Outcome o;
  o.result["omega"] = region_to_json(sd.omega);
  o.result["eps"] = sd.eps;
  o.result["gamma"] = sd.gamma;
  o.result["certificate_a"] = cover_to_json(sd.certificate_a);
  o.result["certificate_b"] = cover_to_json(sd.certificate_b);
  o.certified = sd.eps > 0;
  o.status = o.certified ? "shrunk" : "no margin at this resolution";
  return o;
}

// ---- build-window

struct WindowArgs {
  std::string region;
  double eps = 0;
  std::string inner;
  std::string outer;
  std::vector<std::string> factors;
};

Outcome window_outcome(Job& job, const SampledWindow& g) {
  side_outputs(job, g);
  Outcome o;
  o.result["window"] = window_summary(g);
  o.result["samples"] = window_to_json(g);
  o.certified = g.support_certified();
  o.status = o.certified ? "certified support" : "support not certified";
  return o;
}

Outcome build_smooth(Job& job, const WindowArgs& a) {
  const Region omega = load_region(a.region, job);
  job.inputs["eps"] = a.eps;
  job.require_exact_if_asked(omega.is_exact());
  return window_outcome(job, smooth_window(omega, a.eps, job.h(1.0 / 256)));
}

Outcome build_indicator(Job& job, const WindowArgs& a) {
  const Region omega = load_region(a.region, job);
  job.require_exact_if_asked(omega.is_exact());
  return window_outcome(job, indicator_window(omega, job.h(1.0 / 256)));
}

Outcome build_plateau(Job& job, const WindowArgs& a) {
  const auto inner = parse_interval(a.inner, "--inner");
  const auto outer = parse_interval(a.outer, "--outer");
  job.inputs["inner"] = {inner.first, inner.second};
  job.inputs["outer"] = {outer.first, outer.second};
  job.require_exact_if_asked(true);
  return window_outcome(job, plateau_window_1d(inner, outer, job.h(1.0 / 256)));
}

Outcome build_tensor(Job& job, const WindowArgs& a) {
  if (a.factors.size() < 2) throw PreconditionError("--factor needs at least two windows");
  job.require_exact_if_asked(true);
  std::optional<SampledWindow> g;
  for (std::size_t i = 0; i < a.factors.size(); ++i) {
    SampledWindow f = load_window(a.factors[i], "factor_" + std::to_string(i), job);
    g = g ? tensor_window(*g, f) : std::move(f);
  }
  job.used["h"] = g->h();
  return window_outcome(job, *g);
}

// ---- frame

struct FrameArgs {
  std::string window;
  std::string lattice;
  std::string d;
  int section = -1;
  bool with_samples = false;
  double radius = 4;
  bool adjoint = false;
  std::string signal;
};

GramianOptions gramian_options(Job& job, const FrameArgs& a, int dim) {
  GramianOptions opt;
  opt.section = a.section;
  job.used["section"] = resolved_section(dim, opt);
  return opt;
}

Outcome frame_bounds_cmd(Job& job, const FrameArgs& a) {
  const SampledWindow g = load_window(a.window, "window", job);
  const TFLattice l = parse_lattice(a.lattice, a.d);
  job.inputs["lattice"] = lattice_to_json(l);
  job.require_exact_if_asked(lattice_exact(l));
  job.used["h"] = g.h();
  const double tol = job.tol(1e-9);
  const GramianReport r = frame_bounds(g, l, job.samples(32), gramian_options(job, a, l.dim()));
  Outcome o;
  o.result["bounds"] = r.to_json(a.with_samples);
  o.certified = r.a_est > tol;
  o.status = o.certified ? "frame" : "lower bound not separated from zero";
  return o;
}

Outcome frame_tight_cmd(Job& job, const FrameArgs& a) {
  const SampledWindow g = load_window(a.window, "window", job);
  const TFLattice l = parse_lattice(a.lattice, a.d);
  job.inputs["lattice"] = lattice_to_json(l);
  job.require_exact_if_asked(lattice_exact(l));
  job.used["h"] = g.h();
  const double tol = job.tol(5e-3);
  const GramianReport r = frame_bounds(g, l, job.samples(32), gramian_options(job, a, l.dim()));
  Outcome o;
  o.result["tight_residual"] = r.tight_residual;
  o.result["bounds"] = r.to_json(a.with_samples);
  o.certified = r.tight_residual <= tol;
  o.status = o.certified ? "tight" : "not tight";
  return o;
}

SeparableTFLattice separable_lattice(Job& job, const FrameArgs& a) {
  const TFLattice l = parse_lattice(a.lattice, a.d);
  job.inputs["lattice"] = lattice_to_json(l);
  if (!l.separable()) throw UnsupportedError("this check needs a separable lattice (no --D)");
  job.require_exact_if_asked(lattice_exact(l));
  return l.as_separable();
}

Outcome frame_orthonormality_cmd(Job& job, const FrameArgs& a) {
  const SampledWindow g = load_window(a.window, "window", job);
  SeparableTFLattice l = separable_lattice(job, a);
  job.inputs["adjoint"] = a.adjoint;
  job.inputs["radius"] = a.radius;
  if (a.adjoint) l = adjoint_separable(l);
  job.used["h"] = g.h();
  const double tol = job.tol(5e-3);
  const OrthonormalityReport r = orthonormality(g, l, a.radius);
  Outcome o;
  o.result["lattice_checked"] = lattice_to_json(l);
  o.result["orthonormality"] = r.to_json();
  o.certified = r.residual <= tol;
  o.status = o.certified ? "orthonormal" : "not orthonormal";
  return o;
}

Outcome frame_parseval_cmd(Job& job, const FrameArgs& a) {
  const SampledWindow g = load_window(a.window, "window", job);
  if (a.signal.empty()) throw PreconditionError("--signal is required");
  const SampledWindow f = load_window(a.signal, "signal", job);
  const SeparableTFLattice l = separable_lattice(job, a);
  job.used["h"] = g.h();
  const double tol = job.tol(1e-2);
  const double truncation = job.cfg.truncation.value_or(0);
  const ParsevalReport r = parseval(f, g, l, truncation, tol);
  job.used["truncation"] = r.truncation;
  Outcome o;
  o.result["parseval"] = r.to_json();
  o.certified = r.residual <= tol;
  o.status = o.certified ? "reconstructed" : "reconstruction above tolerance";
  return o;
}

// ---- pipeline

struct PipelineArgs {
  std::string a, b, c, d;
  std::string lattice;
  std::string ma, mb, md;
  int iterations = 12;
  bool with_samples = true;
};

PipelineOptions pipeline_options(Job& job, const PipelineArgs& a) {
  PipelineOptions opt;
  opt.h = job.h(opt.h);
  opt.samples = job.samples(opt.samples);
  opt.tol = job.tol(opt.tol);
  opt.iterations = a.iterations;
  return opt;
}

Outcome pipeline_outcome(Job& job, const PipelineDescriptor& p, const PipelineArgs& a) {
  const PipelineResult r = execute(p);
  side_outputs(job, r.window);
  Outcome o;
  o.result["descriptor"] = p.to_json();
  o.result["execution"] = r.to_json();
  o.result["tight_residual"] = r.bounds.tight_residual;
  if (a.with_samples) o.result["samples"] = window_to_json(r.window);
  o.certified = r.passed;
  if (r.passed)
    o.status = r.tight_expected ? "tight frame" : "frame";
  else
    o.status = r.tight_expected ? "tight residual above tolerance" : "lower bound below tolerance";
  return o;
}

Outcome pipeline_diag(Job& job, const PipelineArgs& a) {
  const std::vector<std::pair<const char*, const std::string*>> named{{"a", &a.a}, {"b", &a.b}, {"c", &a.c}, {"d", &a.d}};
  double v[4];
  for (int i = 0; i < 4; ++i) {
    job.inputs[named[i].first] = *named[i].second;
    v[i] = parse_number(*named[i].second, std::string("--") + named[i].first);
  }
  // parse_number only accepts rationals, so the inputs are always exact here
  job.require_exact_if_asked(true);
  return pipeline_outcome(job, diag_pipeline(v[0], v[1], v[2], v[3], pipeline_options(job, a)), a);
}

std::pair<GeneratorMatrix, GeneratorMatrix> pipeline_ab(const PipelineArgs& a) {
  if (!a.lattice.empty()) {
    const TFLattice l = parse_lattice(a.lattice, "");
    return {l.A, l.B};
  }
  if (a.ma.empty() || a.mb.empty()) throw PreconditionError("give --lattice 'A;B' or both --A and --B");
  return {parse_generator(a.ma, "--A"), parse_generator(a.mb, "--B")};
}

Outcome pipeline_separable(Job& job, const PipelineArgs& a) {
  const auto [ga, gb] = pipeline_ab(a);
  job.inputs["lattice"] = lattice_to_json(TFLattice(ga, gb));
  job.require_exact_if_asked(ga.is_exact() && gb.is_exact());
  return pipeline_outcome(job, separable_reduce(ga, gb, pipeline_options(job, a)), a);
}

Outcome pipeline_block(Job& job, const PipelineArgs& a) {
  const auto [ga, gb] = pipeline_ab(a);
  if (a.md.empty()) throw PreconditionError("--D is required");
  const ParsedMatrix d = parse_matrix(a.md);
  job.inputs["lattice"] = lattice_to_json(TFLattice(ga, gb, d.real));
  job.require_exact_if_asked(ga.is_exact() && gb.is_exact() && d.exact.has_value());
  return pipeline_outcome(job, block_pipeline(ga, d.real, gb, pipeline_options(job, a)), a);
}

// ---- driver

Json config_json(const Job& job) {
  Json c = job.used;
  if (job.cfg.truncation && !c.contains("truncation")) c["truncation"] = *job.cfg.truncation;
  c["max_grid_cells"] = limits().max_grid_cells;
  c["max_lattice_points"] = limits().max_lattice_points;
  return c;
}

void emit(const Job& job, const Json& report) {
  if (job.cfg.out.empty())
    std::cout << report.dump(2) << '\n';
  else
    write_json_file(job.cfg.out, report);
}

Json report_head(const Job& job) {
  Json r;
  r["tool"] = "tflat";
  r["version"] = TFLAT_VERSION;
  r["command"] = job.cfg.command;
  r["inputs"] = job.inputs;
  r["config"] = config_json(job);
  return r;
}

int finish(Job& job, const Outcome& o) {
  const int code = o.certified ? exit_ok : exit_failed;
  Json r = report_head(job);
  r["result"] = o.result;
  r["status"] = o.status;
  r["exit_code"] = code;
  emit(job, r);
  return code;
}

int fail(Job& job, int code, const std::string& status, const std::string& message) {
  std::cerr << "tflat: " << message << '\n';
  Json r = report_head(job);
  r["status"] = status;
  r["message"] = message;
  r["exit_code"] = code;
  // a usage error before the command was known leaves nothing worth a report file
  if (!job.cfg.command.empty()) {
    try {
      emit(job, r);
    } catch (const std::exception& e) {
      std::cerr << "tflat: could not write the report: " << e.what() << '\n';
    }
  }
  return code;
}

int dispatch(Job& job, const std::function<Outcome(Job&)>& handler) {
  try {
    job.cfg.validate();
    return finish(job, handler(job));
  } catch (const Unclassified& e) {
    return fail(job, exit_failed, "unclassified", e.what());
  } catch (const NotReducible& e) {
    return fail(job, exit_failed, "not reducible", e.what());
  } catch (const ResourceError& e) {
    return fail(job, exit_resource, "resource limit", e.what());
  } catch (const ParseError& e) {
    return fail(job, exit_usage, "malformed input", e.what());
  } catch (const PreconditionError& e) {
    return fail(job, exit_usage, "malformed input", e.what());
  } catch (const ConstructionError& e) {
    return fail(job, exit_usage, "malformed input", e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(job, exit_usage, "malformed input", e.what());
  } catch (const std::exception& e) {
    return fail(job, exit_error, "error", e.what());
  }
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Gabor frame windows on time-frequency lattices", "tflat"};
  // -h would shadow the grid step --h
  app.set_help_flag("--help", "print help");
  app.set_version_flag("--version", TFLAT_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  JobConfig cfg;
  std::string mode;
  std::string h_text, tol_text, trunc_text;
  app.add_option("--mode", mode, "exact or float (default: exact when every input is rational)")
      ->check(CLI::IsMember({"exact", "float"}));
  app.add_option("--h", h_text, "grid step (decimal or p/q)");
  app.add_option("--tol", tol_text, "tolerance of the certified check");
  app.add_option("--samples", cfg.samples, "x samples per axis for Gramian checks");
  app.add_option("--truncation", trunc_text, "frequency truncation radius for parseval");
  app.add_option("--out", cfg.out, "report path (default: stdout)");
  app.add_option("--pgm", cfg.pgm, "write |g| of a 2-d window as PGM");
  app.add_option("--csv", cfg.csv, "write the window samples as CSV");

  std::function<Outcome(Job&)> handler;
  const auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help,
                        std::function<Outcome(Job&)> fn) {
    CLI::App* sub = parent->add_subcommand(name, help);
    sub->fallthrough();
    sub->callback([&handler, &cfg, parent, name, fn] {
      cfg.command = parent->get_name() + " " + name;
      handler = fn;
    });
    return sub;
  };
  const auto group = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->require_subcommand(1);
    sub->fallthrough();
    return sub;
  };

  LatticeArgs lat;
  CLI::App* lattice = group("lattice", "density, dual, adjoint and symplectic checks");
  {
    auto* s = leaf(lattice, "density", "density of a generator or a time-frequency lattice",
                   [&](Job& j) { return lattice_density(j, lat); });
    auto* g = s->add_option_group("input");
    g->add_option("--lattice", lat.lattice, "'a,b', 'a,b,c,d' or 'A;B'");
    g->add_option("--matrix", lat.matrix, "generator literal");
    g->require_option(1);
    s->add_option("--D", lat.d, "lower-left block of a non-separable lattice");
    s = leaf(lattice, "dual", "M^{-T}", [&](Job& j) { return lattice_dual(j, lat); });
    s->add_option("--matrix", lat.matrix)->required();
    s = leaf(lattice, "adjoint", "(B^{-T}, A^{-T})", [&](Job& j) { return lattice_adjoint(j, lat); });
    s->add_option("--lattice", lat.lattice)->required();
    s = leaf(lattice, "symplectic", "M^T J M = J", [&](Job& j) { return lattice_symplectic(j, lat); });
    s->add_option("--matrix", lat.matrix)->required();
  }

  CoverArgs cov;
  {
    CLI::App* s = app.add_subcommand("cover", "tiling / packing classification of a region under a lattice");
    s->fallthrough();
    s->callback([&] {
      cfg.command = "cover";
      handler = [&](Job& j) { return cover(j, cov); };
    });
    s->add_option("--region", cov.region, "region JSON file")->required();
    s->add_option("--lattice", cov.lattice, "generator literal")->required();
    s->add_option("--fourier-k", cov.fourier_k, "half-width of the dual lattice section (0 skips)");
    s->add_option("--expect", cov.expect, "verdict counted as success")
        ->check(CLI::IsMember({"tiling", "packing", "k-fold"}));
  }

  CommonArgs com;
  ScaledArgs sca;
  CLI::App* domain = group("build-domain", "common fundamental domains");
  {
    auto* s = leaf(domain, "common", "common domain of Z^2, diag(q,1/q)Z^2 and a triangular lattice",
                   [&](Job& j) { return build_common(j, com); });
    s->add_option("--m", com.m)->required();
    s->add_option("--n", com.n)->required();
    s->add_option("--variant", com.variant)->check(CLI::IsMember({"upper", "lower"}));
    s = leaf(domain, "scaled", "shrink a common domain of sA and B to a domain of A",
             [&](Job& j) { return build_scaled(j, sca); });
    s->add_option("--A", sca.a)->required();
    s->add_option("--B", sca.b)->required();
    s->add_option("--region", sca.region)->required();
    s->add_option("--center", sca.center, "comma separated point (default: centroid)");
    s->add_option("--iterations", sca.iterations);
  }

  WindowArgs win;
  CLI::App* window = group("build-window", "sampled windows");
  {
    auto* s = leaf(window, "smooth", "sqrt of a mollified indicator", [&](Job& j) { return build_smooth(j, win); });
    s->add_option("--region", win.region)->required();
    s->add_option("--eps", win.eps)->required();
    s = leaf(window, "indicator", "indicator of a region", [&](Job& j) { return build_indicator(j, win); });
    s->add_option("--region", win.region)->required();
    s = leaf(window, "plateau", "1-d window with a flat top", [&](Job& j) { return build_plateau(j, win); });
    s->add_option("--inner", win.inner, "lo,hi of the flat part")->required();
    s->add_option("--outer", win.outer, "lo,hi of the support")->required();
    s = leaf(window, "tensor", "tensor product of windows", [&](Job& j) { return build_tensor(j, win); });
    s->add_option("--factor", win.factors, "window file (repeat)")->required();
  }

  FrameArgs fr;
  CLI::App* frame = group("frame", "frame-bound checks");
  {
    const auto common = [&](CLI::App* s) {
      s->add_option("--window", fr.window, "window or report JSON")->required();
      s->add_option("--lattice", fr.lattice, "'a,b', 'a,b,c,d' or 'A;B'")->required();
    };
    auto* s = leaf(frame, "bounds", "Gramian eigenvalue bounds", [&](Job& j) { return frame_bounds_cmd(j, fr); });
    common(s);
    s->add_option("--D", fr.d);
    s->add_option("--section", fr.section, "Gramian half-width J");
    s->add_flag("--with-samples", fr.with_samples, "keep the per-x eigenvalues");
    s = leaf(frame, "tight", "tight-frame residual", [&](Job& j) { return frame_tight_cmd(j, fr); });
    common(s);
    s->add_option("--D", fr.d);
    s->add_option("--section", fr.section);
    s->add_flag("--with-samples", fr.with_samples);
    s = leaf(frame, "orthonormality", "Gram matrix of the shifted windows",
             [&](Job& j) { return frame_orthonormality_cmd(j, fr); });
    common(s);
    s->add_option("--radius", fr.radius, "lattice points with |lambda| <= radius");
    s->add_flag("--adjoint", fr.adjoint, "check the adjoint lattice");
    s = leaf(frame, "parseval", "reconstruction of a signal", [&](Job& j) { return frame_parseval_cmd(j, fr); });
    common(s);
    s->add_option("--signal", fr.signal, "window file used as the signal")->required();
  }

  PipelineArgs pip;
  CLI::App* pipeline = group("pipeline", "window constructions with frame-bound checks");
  {
    auto* s = leaf(pipeline, "diag", "lattice aZ x bZ x cZ x dZ", [&](Job& j) { return pipeline_diag(j, pip); });
    s->add_option("--a", pip.a)->required();
    s->add_option("--b", pip.b)->required();
    s->add_option("--c", pip.c)->required();
    s->add_option("--d", pip.d)->required();
    s->add_option("--iterations", pip.iterations);
    s->add_flag("!--no-samples", pip.with_samples, "leave the window samples out of the report");
    s = leaf(pipeline, "separable", "lattice AZ^2 x BZ^2", [&](Job& j) { return pipeline_separable(j, pip); });
    s->add_option("--lattice", pip.lattice, "'A;B'");
    s->add_option("--A", pip.ma);
    s->add_option("--B", pip.mb);
    s->add_option("--iterations", pip.iterations);
    s->add_flag("!--no-samples", pip.with_samples);
    s = leaf(pipeline, "block", "lattice (A 0; D B)Z^4", [&](Job& j) { return pipeline_block(j, pip); });
    s->add_option("--lattice", pip.lattice, "'A;B'");
    s->add_option("--A", pip.ma);
    s->add_option("--B", pip.mb);
    s->add_option("--D", pip.md)->required();
    s->add_option("--iterations", pip.iterations);
    s->add_flag("!--no-samples", pip.with_samples);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::CallForVersion&) {
    std::cout << TFLAT_VERSION << '\n';
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    std::cerr << "tflat: " << e.what() << '\n';
    return exit_usage;
  }

  Job job(cfg);
  try {
    if (!mode.empty()) job.cfg.mode = mode == "exact" ? Mode::exact : Mode::floating;
    if (!h_text.empty()) job.cfg.h = parse_number(h_text, "--h");
    if (!tol_text.empty()) job.cfg.tol = parse_number(tol_text, "--tol");
    if (!trunc_text.empty()) job.cfg.truncation = parse_number(trunc_text, "--truncation");
  } catch (const ParseError& e) {
    return fail(job, exit_usage, "malformed input", e.what());
  }
  return dispatch(job, handler);
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace tflat::cli
