#include "singstab/system_model.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace singstab {

namespace {

using nlohmann::json;

Matrix parse_matrix(const json& j, const std::string& where, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw ParseError(where + ": expected " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw ParseError(where + "[" + std::to_string(i) + "]: expected " +
                       std::to_string(cols) + " entries");
    }
    for (int k = 0; k < cols; ++k) {
      if (!row[k].is_number()) {
        throw ParseError(where + "[" + std::to_string(i) + "][" +
                         std::to_string(k) + "]: expected a number");
      }
      m(i, k) = row[k].get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

const json& require_key(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing key \"" + key + "\"");
  return *it;
}

// 53-bit uniform in [0, 1); independent of libstdc++ distribution details.
double canonical(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int uniform_int(std::mt19937_64& rng, int n) {
  // rejection sampling keeps the draw exactly uniform
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return static_cast<int>(v % n);
}

}  // namespace

Matrix eps_scale(int d, int l, double eps) {
  if (l < 0 || l > d) throw DimensionError("eps_scale: l outside [0, d]");
  Vector diag(d);
  for (int i = 0; i < d; ++i) diag(i) = (i < l) ? 1.0 : eps;
  return diag.asDiagonal();
}

Matrix eps_scale_complement(int d, int l, double eps) {
  if (l < 0 || l > d) throw DimensionError("eps_scale_complement: l outside [0, d]");
  Vector diag(d);
  for (int i = 0; i < d; ++i) diag(i) = (i < l) ? eps : 1.0;
  return diag.asDiagonal();
}

ModeBlocks abcd(const Mode& m) {
  const int d = static_cast<int>(m.P.rows());
  const Matrix lp = m.Lambda * invert(m.P).inverse;
  const BlockSplit s = block_partition(lp, m.l);
  return ModeBlocks{s.a, s.b, s.c, s.d, m.l, d};
}

Matrix epsilon_generator(const Mode& m, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("epsilon_generator: eps must be > 0");
  const int d = static_cast<int>(m.P.rows());
  return (1.0 / eps) * invert(m.P).inverse * eps_scale_complement(d, m.l, eps) * m.Lambda;
}

Matrix slow_limit(const Mode& m) {
  const int d = static_cast<int>(m.P.rows());
  return invert(m.P).inverse * eps_scale_complement(d, m.l, 0.0) * m.Lambda;
}

void validate(const SwitchedFamily& f) {
  if (f.d <= 0) throw ParseError("d: must be a positive integer");
  if (!(f.tau >= 0.0) || !std::isfinite(f.tau)) throw ParseError("tau: must be a finite number >= 0");
  if (f.modes.empty()) throw ParseError("modes: at least one mode required");
  for (std::size_t i = 0; i < f.modes.size(); ++i) {
    const std::string where = "modes[" + std::to_string(i) + "]";
    const Mode& m = f.modes[i];
    if (m.l < 0 || m.l > f.d) {
      throw ParseError(where + ".l: outside [0, " + std::to_string(f.d) + "]");
    }
    auto check_dims = [&](const Matrix& mat, const char* name) {
      if (mat.rows() != f.d || mat.cols() != f.d) {
        throw ParseError(where + "." + name + ": expected " + std::to_string(f.d) +
                         "x" + std::to_string(f.d));
      }
    };
    check_dims(m.P, "P");
    check_dims(m.Lambda, "Lambda");
    check_dims(m.R, "R");
    try {
      invert(m.P);
    } catch (const SingularMatrixError&) {
      throw ParseError(where + ".P: singular within tolerance");
    }
  }
}

PremiseReport check_premises(const SwitchedFamily& f) {
  PremiseReport out;
  out.all_d_hurwitz = true;
  out.any_ill_conditioned = false;
  for (const Mode& m : f.modes) {
    ModePremise p;
    const ModeBlocks blocks = abcd(m);
    if (blocks.D.size() > 0) {
      p.d_abscissa = spectral_abscissa(blocks.D);
      p.d_hurwitz = p.d_abscissa < 0.0;
    } else {
      p.d_abscissa = -std::numeric_limits<double>::infinity();
      p.d_hurwitz = true;  // no fast block at l = d
    }
    p.p_condition = invert(m.P).condition;
    p.p_ill_conditioned = p.p_condition > 1e8;
    out.all_d_hurwitz = out.all_d_hurwitz && p.d_hurwitz;
    out.any_ill_conditioned = out.any_ill_conditioned || p.p_ill_conditioned;
    out.modes.push_back(p);
  }
  return out;
}

SwitchedFamily parse_system(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("system: invalid JSON: ") + e.what());
  }
  SwitchedFamily f;
  const auto& jd = require_key(j, "d", "system");
  if (!jd.is_number_integer()) throw ParseError("d: must be an integer");
  f.d = jd.get<int>();
  const auto& jt = require_key(j, "tau", "system");
  if (!jt.is_number()) throw ParseError("tau: must be a number");
  f.tau = jt.get<double>();
  const auto& jm = require_key(j, "modes", "system");
  if (!jm.is_array()) throw ParseError("modes: must be an array");
  for (std::size_t i = 0; i < jm.size(); ++i) {
    const std::string where = "modes[" + std::to_string(i) + "]";
    const auto& e = jm[i];
    Mode m;
    const auto& jl = require_key(e, "l", where);
    if (!jl.is_number_integer()) throw ParseError(where + ".l: must be an integer");
    m.l = jl.get<int>();
    m.P = parse_matrix(require_key(e, "P", where), where + ".P", f.d, f.d);
    m.Lambda = parse_matrix(require_key(e, "Lambda", where), where + ".Lambda", f.d, f.d);
    m.R = parse_matrix(require_key(e, "R", where), where + ".R", f.d, f.d);
    f.modes.push_back(std::move(m));
  }
  validate(f);
  return f;
}

SwitchedFamily load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open system file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_system(ss.str());
}

std::string serialize_system(const SwitchedFamily& f) {
  json j;
  j["d"] = f.d;
  j["tau"] = f.tau;
  j["modes"] = json::array();
  for (const Mode& m : f.modes) {
    json e;
    e["l"] = m.l;
    e["P"] = matrix_to_json(m.P);
    e["Lambda"] = matrix_to_json(m.Lambda);
    e["R"] = matrix_to_json(m.R);
    j["modes"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

Signal parse_signal(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("signal: invalid JSON: ") + e.what());
  }
  Signal s;
  const auto& jp = require_key(j, "pieces", "signal");
  if (!jp.is_array()) throw ParseError("pieces: must be an array");
  for (std::size_t i = 0; i < jp.size(); ++i) {
    const std::string where = "pieces[" + std::to_string(i) + "]";
    Piece p;
    const auto& jm = require_key(jp[i], "mode", where);
    if (!jm.is_number_integer()) throw ParseError(where + ".mode: must be an integer");
    p.mode = jm.get<int>();
    const auto& jd = require_key(jp[i], "duration", where);
    if (!jd.is_number()) throw ParseError(where + ".duration: must be a number");
    p.duration = jd.get<double>();
    if (!(p.duration > 0.0)) throw ParseError(where + ".duration: must be > 0");
    s.pieces.push_back(p);
  }
  const auto& jf = require_key(j, "final_mode", "signal");
  if (!jf.is_number_integer()) throw ParseError("final_mode: must be an integer");
  s.final_mode = jf.get<int>();
  return s;
}

Signal load_signal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open signal file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_signal(ss.str());
}

std::string serialize_signal(const Signal& s) {
  json j;
  j["pieces"] = json::array();
  for (const Piece& p : s.pieces) {
    j["pieces"].push_back({{"mode", p.mode}, {"duration", p.duration}});
  }
  j["final_mode"] = s.final_mode;
  return j.dump(2) + "\n";
}

void check_admissible(const Signal& s, const SwitchedFamily& f,
                      bool forbid_self_switch) {
  const int n = static_cast<int>(f.modes.size());
  auto check_mode = [&](int mode, const std::string& where) {
    if (mode < 0 || mode >= n) {
      throw AdmissibilityError(where + ": mode " + std::to_string(mode) +
                               " outside [0, " + std::to_string(n - 1) + "]");
    }
  };
  int prev = -1;
  for (std::size_t i = 0; i < s.pieces.size(); ++i) {
    const std::string where = "pieces[" + std::to_string(i) + "]";
    check_mode(s.pieces[i].mode, where);
    if (s.pieces[i].duration < f.tau - 1e-12) {
      throw AdmissibilityError(where + ": duration " +
                               std::to_string(s.pieces[i].duration) +
                               " below dwell time " + std::to_string(f.tau));
    }
    if (forbid_self_switch && s.pieces[i].mode == prev) {
      throw AdmissibilityError(where + ": consecutive repeat of mode " +
                               std::to_string(prev) + " with self-switching forbidden");
    }
    prev = s.pieces[i].mode;
  }
  check_mode(s.final_mode, "final_mode");
  if (forbid_self_switch && !s.pieces.empty() && s.final_mode == prev) {
    throw AdmissibilityError("final_mode: consecutive repeat with self-switching forbidden");
  }
}

double signal_duration(const Signal& s) {
  double total = 0.0;
  for (const Piece& p : s.pieces) total += p.duration;
  return total;
}

int mode_at(const Signal& s, double t) {
  double acc = 0.0;
  for (const Piece& p : s.pieces) {
    acc += p.duration;
    if (t < acc) return p.mode;
  }
  return s.final_mode;
}

std::vector<double> switching_times(const Signal& s, double t_end) {
  std::vector<double> out;
  double acc = 0.0;
  for (const Piece& p : s.pieces) {
    acc += p.duration;
    if (acc > t_end) break;
    out.push_back(acc);
  }
  return out;
}

Signal periodic_signal(const std::vector<int>& modes, double piece, double t_end) {
  if (modes.empty()) throw std::invalid_argument("periodic_signal: empty mode cycle");
  if (!(piece > 0.0)) throw std::invalid_argument("periodic_signal: piece must be > 0");
  Signal s;
  const int count = static_cast<int>(std::ceil(t_end / piece - 1e-12));
  for (int k = 0; k < count; ++k) {
    s.pieces.push_back({modes[k % modes.size()], piece});
  }
  s.final_mode = modes[count % modes.size()];
  return s;
}

Signal random_signal(std::uint64_t seed, const SwitchedFamily& f, double tau,
                     double mean_extra, double t_end, bool forbid_self_switch) {
  const int n = static_cast<int>(f.modes.size());
  if (n == 0) throw std::invalid_argument("random_signal: family has no modes");
  std::mt19937_64 rng(seed);
  auto draw_mode = [&](int prev) {
    if (!forbid_self_switch || n == 1 || prev < 0) return uniform_int(rng, n);
    const int pick = uniform_int(rng, n - 1);
    return pick >= prev ? pick + 1 : pick;
  };
  Signal s;
  double acc = 0.0;
  int prev = -1;
  while (acc < t_end) {
    Piece p;
    p.mode = draw_mode(prev);
    // inverse-CDF exponential on explicit mantissa bits for reproducibility
    const double u = canonical(rng);
    p.duration = tau + (mean_extra > 0.0 ? -mean_extra * std::log1p(-u) : 0.0);
    if (!(p.duration > 0.0)) p.duration = std::max(tau, 1e-9);
    s.pieces.push_back(p);
    acc += p.duration;
    prev = p.mode;
  }
  s.final_mode = draw_mode(prev);
  return s;
}

}  // namespace singstab
