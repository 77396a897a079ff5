#include "nillab/systems.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nillab/parallel.hpp"
#include "nillab/params.hpp"
#include "nillab/summation.hpp"

namespace nillab {

namespace {

Complex expi(double turns) {
  const double a = 2.0 * std::numbers::pi * turns;
  return {std::cos(a), std::sin(a)};
}

using Quad = __float128;

Quad floor_q(Quad v) {
  auto t = static_cast<__int128>(v);
  if (static_cast<Quad>(t) > v) --t;
  return static_cast<Quad>(t);
}

double frac_q(Quad v) {
  double r = static_cast<double>(v - floor_q(v));
  if (r >= 1.0) r = 0.0;
  if (r < 0.0) r = 0.0;
  return r;
}

std::vector<int> parse_ints(std::string_view text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string_view tok =
        text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
      throw std::invalid_argument("bad integer list \"" + std::string(text) + "\"");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string format_complex(Complex c) {
  std::ostringstream os;
  os.precision(17);
  os << c.real();
  if (c.imag() != 0.0) os << ',' << c.imag();
  return os.str();
}

}  // namespace

NilSystem NilSystem::heisenberg(double alpha, double beta, double gamma) {
  NilSystem sys;
  sys.space = Space::heisenberg();
  sys.tau = {alpha, beta, gamma};
  sys.certificate = {1.0, alpha, beta};
  return sys;
}

NilSystem NilSystem::default_heisenberg() {
  return heisenberg(defaults::alpha(), defaults::beta(), defaults::gamma());
}

NilSystem NilSystem::torus(std::vector<double> shift) {
  NilSystem sys;
  sys.space = Space::torus(static_cast<int>(shift.size()));
  double t[3] = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < shift.size(); ++i) t[i] = shift[i];
  sys.tau = {t[0], t[1], t[2]};
  sys.certificate = {1.0};
  sys.certificate.insert(sys.certificate.end(), shift.begin(), shift.end());
  return sys;
}

bool NilSystem::is_identity_rotation() const {
  const NilPoint moved = reduce(space, tau);
  return moved == base_point(space);
}

void require_ergodic(const NilSystem& sys) {
  if (sys.is_identity_rotation()) {
    throw std::invalid_argument("the trivial rotation is not ergodic");
  }
}

namespace observables {

Observable constant(Complex value) {
  return Observable{"const:" + format_complex(value), [value](const NilPoint&) { return value; },
                    std::abs(value), Continuity::continuous};
}

Observable character(int mx, int my, int mz) {
  std::ostringstream id;
  id << "char:" << mx << ',' << my << ',' << mz;
  return Observable{id.str(),
                    [mx, my, mz](const NilPoint& p) {
                      return expi(mx * p.c[0] + my * p.c[1] + mz * p.c[2]);
                    },
                    1.0, mz == 0 ? Continuity::continuous : Continuity::almost_everywhere};
}

Observable vertical_character(int m) {
  Observable f = character(0, 0, m);
  f.id = "vchar:" + std::to_string(m);
  return f;
}

Observable scaled(Observable f, Complex factor) {
  auto inner = f.eval;
  f.id = "scaled(" + format_complex(factor) + "," + f.id + ")";
  f.eval = [inner, factor](const NilPoint& p) { return factor * inner(p); };
  f.bound *= std::abs(factor);
  return f;
}

Observable conjugated(Observable f) {
  auto inner = f.eval;
  f.id = "conj:" + f.id;
  f.eval = [inner](const NilPoint& p) { return std::conj(inner(p)); };
  return f;
}

Observable parse(std::string_view spec) {
  const std::size_t colon = spec.find(':');
  const std::string_view head = spec.substr(0, colon);
  const std::string_view rest = colon == std::string_view::npos ? "" : spec.substr(colon + 1);
  if (head == "conj") return conjugated(parse(rest));
  if (head == "const") {
    const std::size_t comma = rest.find(',');
    const double re = eval_expression(rest.substr(0, comma));
    const double im = comma == std::string_view::npos ? 0.0 : eval_expression(rest.substr(comma + 1));
    return constant({re, im});
  }
  if (head == "char") {
    const auto m = parse_ints(rest);
    if (m.empty() || m.size() > 3) throw std::invalid_argument("char: expects 1 to 3 frequencies");
    Observable f = character(m[0], m.size() > 1 ? m[1] : 0, m.size() > 2 ? m[2] : 0);
    f.id = std::string(spec);
    return f;
  }
  if (head == "vchar") {
    const auto m = rest.empty() ? std::vector<int>{1} : parse_ints(rest);
    if (m.size() != 1) throw std::invalid_argument("vchar: expects one frequency");
    return vertical_character(m[0]);
  }
  throw std::invalid_argument("unknown observable \"" + std::string(spec) + "\"");
}

}  // namespace observables

NilPoint nilrotate(const NilSystem& sys, const NilPoint& p) {
  return reduce(sys.space, mul(sys.space, sys.tau, lift(p)));
}

GroupElement rotation_power(const NilSystem& sys, std::int64_t k) {
  const double kd = static_cast<double>(k);
  const GroupElement& t = sys.tau;
  if (!sys.space.is_heisenberg()) return {kd * t.x, kd * t.y, kd * t.z};
  const double pairs = kd * (kd - 1.0) / 2.0;
  return {kd * t.x, kd * t.y, kd * t.z + pairs * t.x * t.y};
}

NilPoint rotate_power(const NilSystem& sys, const NilPoint& p, std::int64_t k) {
  const Quad kq = static_cast<Quad>(k);
  const GroupElement& t = sys.tau;
  NilPoint out{sys.space, {}};
  if (!sys.space.is_heisenberg()) {
    const double tv[3] = {t.x, t.y, t.z};
    for (int i = 0; i < sys.space.dim; ++i) {
      out.c[i] = frac_q(kq * static_cast<Quad>(tv[i]) + static_cast<Quad>(p.c[i]));
    }
    return out;
  }
  // τ^k · p = (kα + x, kβ + y, kγ + C(k,2)αβ + z + kα·y), then reduce.
  const Quad a = t.x, b = t.y, g = t.z;
  const Quad x = p.c[0], y = p.c[1], z = p.c[2];
  const Quad X = kq * a + x;
  const Quad Y = kq * b + y;
  const Quad pairs = kq * (kq - 1) / 2;
  const Quad Z = kq * g + pairs * a * b + z + kq * a * y;
  out.c[0] = frac_q(X);
  out.c[1] = frac_q(Y);
  out.c[2] = frac_q(Z - X * floor_q(Y));
  return out;
}

std::vector<NilPoint> orbit(const NilSystem& sys, const NilPoint& p0, std::size_t n) {
  if (n == 0) throw std::invalid_argument("orbit: n must be >= 1");
  std::vector<NilPoint> out;
  out.reserve(n);
  NilPoint p = p0;
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(p);
    p = nilrotate(sys, p);
  }
  return out;
}

Complex birkhoff_avg(const NilSystem& sys, const Observable& f, const NilPoint& p0, std::size_t n) {
  if (n == 0) throw std::invalid_argument("birkhoff_avg: n must be >= 1");
  require_ergodic(sys);
  constexpr std::size_t kChunk = std::size_t{1} << 16;
  // Summing deviations from the first value makes constant observables exact.
  const Complex shift = f(p0);
  auto partial = map_chunks<CompensatedSum<Complex>>(n, kChunk, [&](std::size_t begin, std::size_t end) {
    CompensatedSum<Complex> acc;
    NilPoint p = begin == 0 ? p0 : rotate_power(sys, p0, static_cast<std::int64_t>(begin));
    for (std::size_t k = begin; k < end; ++k) {
      acc.add(f(p) - shift);
      p = nilrotate(sys, p);
    }
    return acc;
  });
  CompensatedSum<Complex> total;
  for (const auto& part : partial) total.add(part);
  return shift + total.value() / static_cast<double>(n);
}

NilPoint project_torus_factor(const NilPoint& p) {
  if (!p.space.is_heisenberg()) throw std::invalid_argument("project_torus_factor: expects a Heisenberg point");
  return NilPoint{Space::torus(2), {p.c[0], p.c[1], 0.0}};
}

NilSystem torus_factor(const NilSystem& sys) {
  NilSystem s = NilSystem::torus({sys.tau.x, sys.tau.y});
  s.metric = sys.metric;
  return s;
}

NilPoint vertical_rotate(const NilPoint& p, double u) {
  if (!p.space.is_heisenberg()) throw std::invalid_argument("vertical_rotate: expects a Heisenberg point");
  return reduce(Space::heisenberg(), heis_mul(lift(p), GroupElement{0.0, 0.0, u}));
}

Complex vertical_average(const Observable& f, const NilPoint& p, std::size_t grid) {
  if (grid == 0) throw std::invalid_argument("vertical_average: grid must be >= 1");
  CompensatedSum<Complex> acc;
  for (std::size_t j = 0; j < grid; ++j) {
    acc.add(f(vertical_rotate(p, static_cast<double>(j) / static_cast<double>(grid))));
  }
  return acc.value() / static_cast<double>(grid);
}

}  // namespace nillab
