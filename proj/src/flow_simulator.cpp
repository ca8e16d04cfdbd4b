#include "singstab/flow_simulator.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace singstab {

namespace {

struct Segment {
  double start = 0.0;
  double duration = 0.0;
  int mode = 0;
  bool switch_after = false;  // a jump happens at start + duration
  int next_mode = 0;
};

// Lays the signal out over [0, t_end]; the final mode extends past the last
// piece. A piece boundary landing exactly on t_end still produces its jump.
std::vector<Segment> layout(const Signal& s, double t_end) {
  std::vector<Segment> segs;
  double cursor = 0.0;
  for (std::size_t i = 0; i < s.pieces.size(); ++i) {
    const Piece& p = s.pieces[i];
    if (cursor >= t_end && !segs.empty()) break;
    Segment seg;
    seg.start = cursor;
    seg.mode = p.mode;
    if (cursor + p.duration >= t_end) {
      seg.duration = t_end - cursor;
      seg.switch_after = (cursor + p.duration == t_end);
      if (seg.switch_after) {
        seg.next_mode =
            (i + 1 < s.pieces.size()) ? s.pieces[i + 1].mode : s.final_mode;
      }
      segs.push_back(seg);
      cursor = t_end;
      break;
    }
    seg.duration = p.duration;
    seg.switch_after = true;
    segs.push_back(seg);
    cursor += p.duration;
  }
  if (cursor < t_end || segs.empty()) {
    Segment tail;
    tail.start = cursor;
    tail.duration = t_end - cursor;
    tail.mode = s.final_mode;
    segs.push_back(tail);
  }
  // chain next_mode through the actual successors
  for (std::size_t i = 0; i + 1 < segs.size(); ++i) segs[i].next_mode = segs[i + 1].mode;
  return segs;
}

struct TargetDynamics {
  Target target;
  const SwitchedFamily* f;
  const ReducedFamily* rf;  // null for SigmaEps
  double eps = 0.0;
  const std::vector<Matrix>* transients = nullptr;

  // generator of the continuous part in the state coordinates of `mode`
  Matrix generator(int mode) const {
    switch (target) {
      case Target::SigmaEps:
        return epsilon_generator(f->modes.at(mode), eps);
      case Target::SigmaHat: {
        const ReducedMode& m = rf->modes.at(mode);
        Matrix g = Matrix::Zero(rf->d, rf->d);
        g.bottomRightCorner(rf->d - m.l, rf->d - m.l) = m.D;
        return g;
      }
      case Target::SigmaBar:
      case Target::SigmaTilde:
        return rf->modes.at(mode).M;
    }
    throw std::logic_error("unknown target");
  }

  Matrix jump(int to, int from, int switch_index) const {
    switch (target) {
      case Target::SigmaEps:
        return f->modes.at(from).R;
      case Target::SigmaHat:
        return hat_jump(*rf, to, from);
      case Target::SigmaBar:
        return bar_jump(*rf, to, from);
      case Target::SigmaTilde: {
        if (transients && switch_index >= 0 &&
            switch_index < static_cast<int>(transients->size())) {
          return tilde_jump(*rf, to, from, (*transients)[switch_index]);
        }
        return bar_jump(*rf, to, from);
      }
    }
    throw std::logic_error("unknown target");
  }

};

Vector padded(const Vector& v, int d) {
  if (v.size() == d) return v;
  Vector out = Vector::Zero(d);
  out.head(v.size()) = v;
  return out;
}

}  // namespace

Trajectory simulate(const SwitchedFamily& f, const Signal& s, Target target,
                    const Vector& x0, double t_end, const SimOptions& opt) {
  validate(f);
  if (opt.dt_out <= 0.0) throw std::invalid_argument("dt_out must be positive");
  if (t_end < 0.0) throw std::invalid_argument("t_end must be nonnegative");
  if (x0.size() != f.d) throw std::invalid_argument("x0 dimension mismatch");
  if (target == Target::SigmaEps && opt.eps <= 0.0) {
    throw std::invalid_argument("SigmaEps simulation needs eps > 0");
  }

  ReducedFamily rf;
  if (target != Target::SigmaEps) rf = reduce(f);

  TargetDynamics dyn{target, &f, target == Target::SigmaEps ? nullptr : &rf,
                     opt.eps, &opt.transients};

  const std::vector<Segment> segs = layout(s, t_end);

  // initial state in the coordinates of the first segment's mode
  Vector x;
  {
    const int m0 = segs.front().mode;
    switch (target) {
      case Target::SigmaEps: x = x0; break;
      case Target::SigmaHat: x = rf.modes.at(m0).T * x0; break;
      case Target::SigmaBar:
      case Target::SigmaTilde:
        x = (rf.modes.at(m0).T * x0).head(rf.modes.at(m0).l);
        break;
    }
  }

  Trajectory tr;
  tr.t.push_back(0.0);
  tr.x.push_back(padded(x, f.d));
  tr.mode.push_back(segs.front().mode);

  int switch_index = 0;
  for (const Segment& seg : segs) {
    const Matrix gen = dyn.generator(seg.mode);
    if (seg.duration > 0.0) {
      const Matrix step = mat_exp(gen, opt.dt_out);
      Vector cur = x;
      double local = 0.0;
      while (local + opt.dt_out < seg.duration * (1.0 - 1e-12)) {
        local += opt.dt_out;
        cur = step * cur;
        tr.t.push_back(seg.start + local);
        tr.x.push_back(padded(cur, f.d));
        tr.mode.push_back(seg.mode);
      }
      x = mat_exp(gen, seg.duration - local) * cur;
    }
    const double t_edge = seg.start + seg.duration;
    if (seg.duration > 0.0) {  // zero-length segments already have their row
      tr.t.push_back(t_edge);
      tr.x.push_back(padded(x, f.d));
      tr.mode.push_back(seg.mode);
    }

    if (seg.switch_after) {
      x = dyn.jump(seg.next_mode, seg.mode, switch_index) * x;
      ++switch_index;
      tr.t.push_back(t_edge);
      tr.x.push_back(padded(x, f.d));
      tr.mode.push_back(seg.next_mode);
    }
  }
  return tr;
}

Matrix flow_at_switch(const SwitchedFamily& f, const Signal& s, Target target,
                      int k, const SimOptions& opt) {
  validate(f);
  if (k < 1 || k > static_cast<int>(s.pieces.size())) {
    throw std::invalid_argument("switch index out of range");
  }
  if (target == Target::SigmaEps && opt.eps <= 0.0) {
    throw std::invalid_argument("SigmaEps flow needs eps > 0");
  }
  ReducedFamily rf;
  if (target != Target::SigmaEps) rf = reduce(f);
  TargetDynamics dyn{target, &f, target == Target::SigmaEps ? nullptr : &rf,
                     opt.eps, &opt.transients};

  Matrix flow;
  for (int i = 0; i < k; ++i) {
    const Piece& p = s.pieces[i];
    const Matrix e = mat_exp(dyn.generator(p.mode), p.duration);
    flow = (i == 0) ? e : Matrix(e * flow);
    const int next =
        (i + 1 < static_cast<int>(s.pieces.size())) ? s.pieces[i + 1].mode : s.final_mode;
    flow = dyn.jump(next, p.mode, i) * flow;
  }
  return flow;
}

double fit_decay_rate(const Trajectory& tr, double t_lo, double t_hi) {
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    if (tr.t[i] < t_lo || tr.t[i] > t_hi) continue;
    const double norm = tr.x[i].norm();
    if (!(norm > 0.0)) continue;
    const double y = std::log(norm);
    st += tr.t[i];
    sy += y;
    stt += tr.t[i] * tr.t[i];
    sty += tr.t[i] * y;
    ++n;
  }
  if (n < 2) return -std::numeric_limits<double>::infinity();
  const double var = stt - st * st / n;
  if (var <= 0.0) return -std::numeric_limits<double>::infinity();
  return (sty - st * sy / n) / var;
}

void write_csv(const Trajectory& tr, std::ostream& out) {
  const int d = tr.dimension();
  out << "t";
  for (int j = 1; j <= d; ++j) out << ",x" << j;
  out << ",mode\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    out << tr.t[i];
    for (int j = 0; j < d; ++j) out << "," << tr.x[i](j);
    out << "," << tr.mode[i] << "\n";
  }
}

}  // namespace singstab
