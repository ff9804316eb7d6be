#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "rigidlab/geometry.hpp"

namespace rigidlab {

inline constexpr double kGoldenMean = 0.6180339887498949;

// Circle diffeomorphism h(w) = w + (a / 2pi) * sin(2pi w), 0 <= a < 1.
struct SineDiffeo {
    double amplitude = 0.0;

    double apply(double w) const;
    double inverse(double v) const;  // Newton on the lift
    double derivative(double w) const;
    double max_derivative() const { return 1.0 + amplitude; }
    double min_derivative() const { return 1.0 - amplitude; }
};

enum class SystemKind {
    Rotation,
    ProductDoublingRotation,
    ConjugatedRotationCocycle,
    ContractingFiber,
    NeutralCenterToy,
};

enum class DriveKind {
    Linear,     // tau(x) = x
    StepGraph,  // drive cohomologous to a step graph over the doubling base
};

// Parameters of a built-in system. Rotation angles may be exact rationals
// (p/q) so periodic orbits close exactly.
struct SystemSpec {
    SystemKind kind = SystemKind::Rotation;
    double alpha = kGoldenMean;
    bool alpha_rational = false;
    long alpha_p = 0;
    long alpha_q = 1;
    double contraction = 0.5;               // ContractingFiber rate c
    DriveKind drive = DriveKind::StepGraph;  // ContractingFiber drive
    int graph_levels = 64;                  // step-graph resolution
    double h_amplitude = 0.5;               // conjugacy amplitude

    static SystemSpec rotation(double alpha);
    static SystemSpec rotation(long p, long q);
    static SystemSpec product_doubling_rotation(double alpha);
    static SystemSpec conjugated_rotation_cocycle(double alpha, double h_amplitude);
    static SystemSpec contracting_fiber(double rate, DriveKind drive = DriveKind::StepGraph);
    static SystemSpec neutral_center_toy(double alpha = kGoldenMean, double h_amplitude = 0.4);

    LeafModel fiber_model() const;
    bool doubling_base() const {
        return kind == SystemKind::ProductDoublingRotation || kind == SystemKind::ContractingFiber;
    }
    SineDiffeo conjugacy() const;
    // Attracting-graph value per step-graph level.
    double graph_value(int level) const;
    double step_drive(double base) const;  // tau(x) for the contracting fiber
    std::string kind_name() const;
};

struct State {
    double base = 0.0;
    double fiber = 0.0;
};

// One application of the skew product F(x,v) = (f(x), A_x(v)). Rotation
// states carry the rotating coordinate in `fiber` over a trivial base. For
// rational rotations, lattice points x0 + k/q step exactly on the lattice.
State step(const SystemSpec& spec, const State& state);

// Deterministic orbit sampler: exactly T states starting at the initial one.
// Doubling bases run on a 64-bit integer register, shifted left with one
// seeded fresh low bit per step, so the double-precision base orbit satisfies
// x' = 2x mod 1 exactly while staying equidistributed for any T.
class OrbitStream {
  public:
    OrbitStream(const SystemSpec& spec, State initial, long length, std::uint64_t seed);

    bool next(State& out);
    void reset();
    long length() const { return length_; }
    const SystemSpec& spec() const { return spec_; }
    State initial() const { return initial_; }
    std::uint64_t seed() const { return seed_; }

  private:
    SystemSpec spec_;
    State initial_;
    long length_ = 0;
    std::uint64_t seed_ = 0;

    long emitted_ = 0;
    std::mt19937_64 rng_;
    std::uint64_t base_register_ = 0;
    long phase_ = 0;     // rational rotation lattice index
    long steps_ = 0;     // irrational rotation index
    double fiber_w_ = 0.0;  // conjugated coordinate for cocycle fibers
    State current_;

    void advance();
};

// Fiber Lyapunov exponent along an orbit: mean log |dA_x/dv|.
double fiber_lyapunov(const SystemSpec& spec, State initial, long length, std::uint64_t seed);

// Two-sided fiber orbit over a fixed base point, for the truncated sup
// metric: returns the fiber coordinate of F^n(x, v), |n| <= window.
std::function<Point(const Point&, int)> fiber_orbit_map(const SystemSpec& spec, double base,
                                                        int window);

}  // namespace rigidlab
