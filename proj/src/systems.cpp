#include "rigidlab/systems.hpp"

#include <cmath>
#include <numeric>
#include <vector>

namespace rigidlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double frac(double x) { return x - std::floor(x); }

double wrap_unit(double x) {
    if (x >= 1.0) x -= 1.0;
    if (x < 0.0) x += 1.0;
    return x;
}

// Rational rotations: snap the wrap so lattice orbits close exactly.
double rational_rotate(double x, double alpha) {
    double y = x + alpha;
    if (y >= 1.0 - 1e-12) y = std::max(0.0, y - 1.0);
    return y;
}

}  // namespace

double SineDiffeo::apply(double w) const {
    double k = std::floor(w);
    double t = w - k;
    return k + t + amplitude / kTwoPi * std::sin(kTwoPi * t);
}

double SineDiffeo::derivative(double w) const {
    return 1.0 + amplitude * std::cos(kTwoPi * w);
}

double SineDiffeo::inverse(double v) const {
    double w = v;
    for (int it = 0; it < 60; ++it) {
        double err = apply(w) - v;
        if (std::fabs(err) < 1e-15) break;
        w -= err / derivative(w);
    }
    return w;
}

SystemSpec SystemSpec::rotation(double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0,1)");
    SystemSpec s;
    s.kind = SystemKind::Rotation;
    s.alpha = alpha;
    return s;
}

SystemSpec SystemSpec::rotation(long p, long q) {
    if (q <= 0) throw std::invalid_argument("alpha denominator must be positive");
    long g = std::gcd(p, q);
    p = ((p / g) % (q / g) + q / g) % (q / g);
    q = q / g;
    SystemSpec s;
    s.kind = SystemKind::Rotation;
    s.alpha_rational = true;
    s.alpha_p = p;
    s.alpha_q = q;
    s.alpha = static_cast<double>(p) / static_cast<double>(q);
    return s;
}

SystemSpec SystemSpec::product_doubling_rotation(double alpha) {
    SystemSpec s = rotation(alpha);
    s.kind = SystemKind::ProductDoublingRotation;
    return s;
}

SystemSpec SystemSpec::conjugated_rotation_cocycle(double alpha, double h_amplitude) {
    if (!(h_amplitude >= 0.0 && h_amplitude < 1.0))
        throw std::invalid_argument("conjugacy amplitude must lie in [0,1)");
    SystemSpec s = rotation(alpha);
    s.kind = SystemKind::ConjugatedRotationCocycle;
    s.h_amplitude = h_amplitude;
    return s;
}

SystemSpec SystemSpec::contracting_fiber(double rate, DriveKind drive) {
    if (!(rate > 0.0 && rate < 1.0)) throw std::invalid_argument("contraction rate must lie in (0,1)");
    SystemSpec s;
    s.kind = SystemKind::ContractingFiber;
    s.contraction = rate;
    s.drive = drive;
    return s;
}

SystemSpec SystemSpec::neutral_center_toy(double alpha, double h_amplitude) {
    SystemSpec s = conjugated_rotation_cocycle(alpha, h_amplitude);
    s.kind = SystemKind::NeutralCenterToy;
    return s;
}

LeafModel SystemSpec::fiber_model() const {
    if (kind == SystemKind::ContractingFiber) return LeafModel::interval(1.0);
    return LeafModel::circle(1.0);
}

SineDiffeo SystemSpec::conjugacy() const { return SineDiffeo{h_amplitude}; }

double SystemSpec::graph_value(int level) const {
    return 1.0 / 3.0 + frac((level + 1) * kGoldenMean) / 3.0;
}

double SystemSpec::step_drive(double base) const {
    if (drive == DriveKind::Linear) return base;
    auto level = [&](double x) { return static_cast<int>(std::floor(x * graph_levels)); };
    double g_here = graph_value(level(base));
    double g_next = graph_value(level(wrap_unit(2.0 * base - std::floor(2.0 * base))));
    return (g_next - contraction * g_here) / (1.0 - contraction);
}

std::string SystemSpec::kind_name() const {
    switch (kind) {
        case SystemKind::Rotation: return "rotation";
        case SystemKind::ProductDoublingRotation: return "product_doubling_rotation";
        case SystemKind::ConjugatedRotationCocycle: return "conjugated_rotation_cocycle";
        case SystemKind::ContractingFiber: return "contracting_fiber";
        case SystemKind::NeutralCenterToy: return "neutral_center_toy";
    }
    return "unknown";
}

State step(const SystemSpec& spec, const State& state) {
    State out = state;
    switch (spec.kind) {
        case SystemKind::Rotation: {
            out.base = 0.0;
            out.fiber = spec.alpha_rational ? rational_rotate(state.fiber, spec.alpha)
                                            : wrap_unit(state.fiber + spec.alpha);
            break;
        }
        case SystemKind::ProductDoublingRotation: {
            out.base = wrap_unit(2.0 * state.base - std::floor(2.0 * state.base));
            out.fiber = spec.alpha_rational ? rational_rotate(state.fiber, spec.alpha)
                                            : wrap_unit(state.fiber + spec.alpha);
            break;
        }
        case SystemKind::ContractingFiber: {
            out.base = wrap_unit(2.0 * state.base - std::floor(2.0 * state.base));
            out.fiber = spec.contraction * state.fiber +
                        (1.0 - spec.contraction) * spec.step_drive(state.base);
            break;
        }
        case SystemKind::ConjugatedRotationCocycle:
        case SystemKind::NeutralCenterToy: {
            out.base = spec.alpha_rational ? rational_rotate(state.base, spec.alpha)
                                           : wrap_unit(state.base + spec.alpha);
            SineDiffeo h = spec.conjugacy();
            double w = frac(h.inverse(state.fiber));
            out.fiber = frac(h.apply(frac(w + state.base)));
            break;
        }
    }
    return out;
}

OrbitStream::OrbitStream(const SystemSpec& spec, State initial, long length, std::uint64_t seed)
    : spec_(spec), initial_(initial), length_(length), seed_(seed) {
    if (length < 1) throw std::invalid_argument("orbit length must be >= 1");
    reset();
}

void OrbitStream::reset() {
    emitted_ = 0;
    steps_ = 0;
    phase_ = 0;
    rng_.seed(seed_);
    current_ = initial_;
    if (spec_.kind == SystemKind::Rotation) {
        current_.base = 0.0;
        current_.fiber = frac(initial_.fiber);
    }
    if (spec_.doubling_base()) {
        double b = frac(initial_.base);
        base_register_ = static_cast<std::uint64_t>(std::ldexp(b, 64));
        base_register_ |= rng_() & 0x7FF;  // fill the bits below double precision
        current_.base = static_cast<double>(base_register_ >> 11) * 0x1.0p-53;
    }
    if (spec_.kind == SystemKind::ConjugatedRotationCocycle ||
        spec_.kind == SystemKind::NeutralCenterToy) {
        fiber_w_ = frac(spec_.conjugacy().inverse(frac(initial_.fiber)));
        current_.fiber = frac(spec_.conjugacy().apply(fiber_w_));
    }
}

void OrbitStream::advance() {
    switch (spec_.kind) {
        case SystemKind::Rotation: {
            ++steps_;
            if (spec_.alpha_rational) {
                phase_ = (phase_ + spec_.alpha_p) % spec_.alpha_q;
                double v = frac(initial_.fiber) +
                           static_cast<double>(phase_) / static_cast<double>(spec_.alpha_q);
                current_.fiber = v >= 1.0 ? v - 1.0 : v;
            } else {
                current_.fiber = frac(frac(initial_.fiber) + static_cast<double>(steps_) * spec_.alpha);
            }
            break;
        }
        case SystemKind::ProductDoublingRotation: {
            ++steps_;
            base_register_ = (base_register_ << 1) | (rng_() & 1ULL);
            current_.base = static_cast<double>(base_register_ >> 11) * 0x1.0p-53;
            current_.fiber = frac(frac(initial_.fiber) + static_cast<double>(steps_) * spec_.alpha);
            break;
        }
        case SystemKind::ContractingFiber: {
            const double c = spec_.contraction;
            if (spec_.drive == DriveKind::StepGraph) {
                // Cell indices straight from the register: the injected low bit
                // never reaches the level bits, so the graph relation is exact.
                auto level_of = [&](std::uint64_t u) {
                    return static_cast<int>(
                        (static_cast<unsigned __int128>(u) *
                         static_cast<unsigned __int128>(spec_.graph_levels)) >>
                        64);
                };
                double g_here = spec_.graph_value(level_of(base_register_));
                double g_next = spec_.graph_value(level_of(base_register_ << 1));
                current_.fiber = g_next + c * (current_.fiber - g_here);
            } else {
                current_.fiber = c * current_.fiber + (1.0 - c) * current_.base;
            }
            base_register_ = (base_register_ << 1) | (rng_() & 1ULL);
            current_.base = static_cast<double>(base_register_ >> 11) * 0x1.0p-53;
            break;
        }
        case SystemKind::ConjugatedRotationCocycle:
        case SystemKind::NeutralCenterToy: {
            fiber_w_ = frac(fiber_w_ + current_.base);
            ++steps_;
            if (spec_.alpha_rational) {
                phase_ = (phase_ + spec_.alpha_p) % spec_.alpha_q;
                double v = frac(initial_.base) +
                           static_cast<double>(phase_) / static_cast<double>(spec_.alpha_q);
                current_.base = v >= 1.0 ? v - 1.0 : v;
            } else {
                current_.base = frac(frac(initial_.base) + static_cast<double>(steps_) * spec_.alpha);
            }
            current_.fiber = frac(spec_.conjugacy().apply(fiber_w_));
            break;
        }
    }
}

bool OrbitStream::next(State& out) {
    if (emitted_ >= length_) return false;
    out = current_;
    ++emitted_;
    if (emitted_ < length_) advance();
    return true;
}

double fiber_lyapunov(const SystemSpec& spec, State initial, long length, std::uint64_t seed) {
    OrbitStream stream(spec, initial, length, seed);
    State s;
    double sum = 0.0;
    long n = 0;
    SineDiffeo h = spec.conjugacy();
    while (stream.next(s)) {
        double deriv = 1.0;
        switch (spec.kind) {
            case SystemKind::ContractingFiber: deriv = spec.contraction; break;
            case SystemKind::ConjugatedRotationCocycle:
            case SystemKind::NeutralCenterToy: {
                double w = frac(h.inverse(s.fiber));
                deriv = h.derivative(frac(w + s.base)) / h.derivative(w);
                break;
            }
            default: deriv = 1.0; break;
        }
        sum += std::log(deriv);
        ++n;
    }
    return sum / static_cast<double>(n);
}

std::function<Point(const Point&, int)> fiber_orbit_map(const SystemSpec& spec, double base,
                                                        int window) {
    if (spec.kind == SystemKind::Rotation)
        throw std::invalid_argument("rotation has no fiber structure over the base");
    if (spec.kind == SystemKind::ContractingFiber)
        throw std::invalid_argument("contracting fibers are not invertible along fibers");
    if (spec.kind == SystemKind::ProductDoublingRotation) {
        double alpha = spec.alpha;
        return [alpha](const Point& p, int n) {
            return Point(frac(p.scalar() + static_cast<double>(n) * alpha));
        };
    }
    // Conjugated cocycle fibers: v_n = h(h^{-1}(v) + theta_n) with theta_n the
    // accumulated drive along the base orbit.
    std::vector<double> theta(static_cast<size_t>(2 * window + 1), 0.0);
    auto at = [&](int n) -> double& { return theta[static_cast<size_t>(n + window)]; };
    for (int n = 1; n <= window; ++n)
        at(n) = at(n - 1) + frac(base + (n - 1) * spec.alpha);
    for (int n = -1; n >= -window; --n) at(n) = at(n + 1) - frac(base + n * spec.alpha);
    SineDiffeo h = spec.conjugacy();
    return [h, theta, window](const Point& p, int n) {
        if (n < -window || n > window)
            throw std::invalid_argument("fiber orbit queried beyond the precomputed window");
        double w = h.inverse(p.scalar());
        double shifted = w + theta[static_cast<size_t>(n + window)];
        return Point(frac(h.apply(frac(shifted))));
    };
}

}  // namespace rigidlab
