#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "svinvopt/functionals.hpp"
#include "svinvopt/verify.hpp"

using namespace svinvopt;
namespace tst = svinvopt::testing;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

SystemState random_system(Rng& rng, int m) {
    SystemState s(m);
    s.tank.xi = rng.uniform(-1, 1);
    s.tank.w = rng.uniform(-1, 1);
    for (int i = 0; i < m; ++i) {
        s.modal.a[i] = rng.uniform(-1, 1);
        s.modal.adot[i] = rng.uniform(-1, 1);
    }
    return s;
}

SystemState scaled(const SystemState& s, double lam) {
    SystemState out = s;
    out.tank.xi *= lam;
    out.tank.w *= lam;
    out.modal.a *= lam;
    out.modal.adot *= lam;
    return out;
}

ControllerParams feasible_ctrl(Rng& rng, const PhysicalParams& phys, double lo, double hi) {
    const double r = rng.uniform(0.3, 3.0);
    const double k = rng.uniform(0.4, 2.0);
    const double rhs = assumption_A_margin(phys, r, k, 0.0);
    const double Q = rng.uniform(0.05, 0.9) * rhs / (k * k * k);
    ControllerParams ctrl{1.0, r, k, Q};
    ctrl.gamma = gamma_star(phys, r, k, Q) * rng.uniform(lo, hi);
    return ctrl;
}
}  // namespace

TEST_CASE("W examples") {
    PhysicalParams phys{1.3, 1.0, 0.0};
    CHECK(W_value(ModalState(3), 1.0, phys) == 0.0);
    ModalState s(2);
    s.a << 1.0, 0.0;
    CHECK(W_value(s, 0.0, phys) ==
          doctest::Approx(0.5 + phys.sigma * kPi * kPi / 2.0).epsilon(1e-14));
}

TEST_CASE("W matches the quadrature of its field definition") {
    Rng rng(21);
    PhysicalParams phys{0.7, 0.9, 0.4};
    const double r = 1.0;
    SystemState sys = random_system(rng, 4);
    const ModalState& s = sys.modal;
    auto comp = [&](double x) {
        return tst::u_fn(s)(x) - phys.mu * tst::phi_x_fn(s)(x) +
               phys.kappa * tst::cap_phi_fn(s)(x);
    };
    const double oracle = 0.5 * tst::l2sq(tst::u_fn(s)) +
                          0.5 * (1.0 + r) * tst::l2sq(tst::phi_fn(s)) +
                          0.5 * phys.sigma * (1.0 + r) * tst::l2sq(tst::phi_x_fn(s)) +
                          0.5 * r * tst::l2sq(comp);
    CHECK(W_value(s, r, phys) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("V examples and weak-norm bound") {
    PhysicalParams phys;
    SystemState s(1);
    CHECK(V_value(SystemState(2), ControllerParams{3, 1, 1, 0.5}, phys) == 0.0);
    s.tank.xi = 1.0;
    CHECK(V_value(s, ControllerParams{3, 1, 1, 0.0}, phys) == doctest::Approx(1.0));

    Rng rng(22);
    const ControllerParams ctrl = feasible_ctrl(rng, phys, 1.1, 1.1);
    const int m = 5;
    const double c5 = weak_norm_bound(phys, ctrl, m);
    const Eigen::VectorXd nw = weak_norm_diagonal(m);
    for (int trial = 0; trial < 200; ++trial) {
        const SystemState x = random_system(rng, m);
        const Eigen::VectorXd xv = pack_state(x);
        const double norm = xv.dot(nw.asDiagonal() * xv);
        CHECK(V_value(x, ctrl, phys) <= c5 * norm * (1.0 + 1e-12));
    }
}

TEST_CASE("q examples and cross-form consistency") {
    PhysicalParams phys{1.1, 0.8, 0.2};
    ControllerParams ctrl{2.9, 1.4, 0.9, 0.25};
    CHECK(q_value(SystemState(3), ctrl, phys) == 0.0);

    // Q = 0 collapses to the tank quadratic
    ControllerParams tank_only = ctrl;
    tank_only.Q = 0.0;
    Rng rng(23);
    for (int i = 0; i < 10; ++i) {
        const SystemState s = random_system(rng, 3);
        const double wk = s.tank.w + tank_only.k * s.tank.xi;
        const double expect = tank_only.k * s.tank.xi * s.tank.xi +
                              (tank_only.gamma - 2.0) / (2.0 * tank_only.k) * wk * wk;
        CHECK(q_value(s, tank_only, phys) == doctest::Approx(expect).epsilon(1e-14));
    }

    const int m = 3;
    const Eigen::MatrixXd Qq = q_matrix(phys, ctrl, m);
    const Eigen::MatrixXd Qv = V_matrix(phys, ctrl, m);
    double worst_q = 0.0, worst_v = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const SystemState s = random_system(rng, m);
        const Eigen::VectorXd x = pack_state(s);
        const double qd = q_value(s, ctrl, phys);
        const double vd = V_value(s, ctrl, phys);
        worst_q = std::max(worst_q,
                           std::abs(qd - x.dot(Qq * x)) / std::max(std::abs(qd), 1e-12));
        worst_v = std::max(worst_v,
                           std::abs(vd - x.dot(Qv * x)) / std::max(std::abs(vd), 1e-12));
    }
    CHECK(worst_q < 1e-12);
    CHECK(worst_v < 1e-12);
}

TEST_CASE("feedback examples") {
    PhysicalParams phys{0.9, 0.7, 0.2};
    ControllerParams ctrl{2.2, 0.8, 1.3, 0.3};
    CHECK(feedback_P(SystemState(2), ctrl, phys) == 0.0);

    ControllerParams tank_only = ctrl;
    tank_only.Q = 0.0;
    SystemState s(2);
    s.tank.xi = 0.4;
    s.tank.w = -0.7;
    CHECK(feedback_P(s, tank_only, phys) ==
          doctest::Approx(tank_only.gamma * tank_only.k *
                          (s.tank.w + tank_only.k * s.tank.xi))
              .epsilon(1e-14));

    SystemState mode1(2);
    mode1.modal.a[0] = 1.0;
    const double k3 = ctrl.k * ctrl.k * ctrl.k;
    const double expect = 2.0 * kSqrt2 * ctrl.gamma * k3 * ctrl.r * ctrl.Q *
                          (phys.kappa + phys.mu * kPi * kPi) / (kPi * kPi);
    CHECK(feedback_P(mode1, ctrl, phys) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("feedback matches the quadrature of its integral form") {
    // P = gamma k^3 (k^-2 w + k^-1 xi - r Q int(kappa x phi + ((r+1)/r) x phibar + mu phi') dx)
    Rng rng(24);
    PhysicalParams phys{1.2, 0.5, 0.35};
    ControllerParams ctrl{3.1, 1.7, 0.8, 0.4};
    const SystemState s = random_system(rng, 5);
    auto integrand = [&](double x) {
        return phys.kappa * x * tst::phi_fn(s.modal)(x) +
               (ctrl.r + 1.0) / ctrl.r * x * tst::phi_t_fn(s.modal)(x) +
               phys.mu * tst::phi_x_fn(s.modal)(x);
    };
    const double integral = tst::integrate_interval(integrand, 1.0);
    const double k3 = ctrl.k * ctrl.k * ctrl.k;
    const double oracle =
        ctrl.gamma * k3 *
        (s.tank.w / (ctrl.k * ctrl.k) + s.tank.xi / ctrl.k - ctrl.r * ctrl.Q * integral);
    CHECK(feedback_P(s, ctrl, phys) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("quadratic homogeneity and feedback linearity") {
    Rng rng(25);
    PhysicalParams phys{0.8, 1.1, 0.1};
    ControllerParams ctrl{2.6, 1.2, 1.1, 0.2};
    const SystemState s = random_system(rng, 4);
    const double lam = 1.7;
    const SystemState sl = scaled(s, lam);
    CHECK(W_value(sl.modal, ctrl.r, phys) ==
          doctest::Approx(lam * lam * W_value(s.modal, ctrl.r, phys)).epsilon(1e-13));
    CHECK(V_value(sl, ctrl, phys) ==
          doctest::Approx(lam * lam * V_value(s, ctrl, phys)).epsilon(1e-13));
    CHECK(q_value(sl, ctrl, phys) ==
          doctest::Approx(lam * lam * q_value(s, ctrl, phys)).epsilon(1e-12).scale(1.0));
    CHECK(feedback_P(sl, ctrl, phys) ==
          doctest::Approx(lam * feedback_P(s, ctrl, phys)).epsilon(1e-13).scale(1.0));
}

TEST_CASE("dissipation identity holds pointwise in state space") {
    Rng rng(26);
    for (int m : {1, 4, 8}) {
        PhysicalParams phys{rng.uniform(0.4, 2.0), rng.uniform(0.3, 1.5),
                            rng.uniform(0.0, 0.8)};
        const ControllerParams ctrl = feasible_ctrl(rng, phys, 0.6, 2.5);
        const Eigen::MatrixXd M = closed_loop_matrix(phys, ctrl, m);
        const Eigen::MatrixXd Qv = V_matrix(phys, ctrl, m);
        const double k3 = ctrl.k * ctrl.k * ctrl.k;
        for (int trial = 0; trial < 100; ++trial) {
            const SystemState s = random_system(rng, m);
            const Eigen::VectorXd x = pack_state(s);
            const Eigen::VectorXd gradV = 2.0 * (Qv * x);
            const double vdot = gradV.dot(M * x);
            const double qv = q_value(s, ctrl, phys);
            const double P = feedback_P(s, ctrl, phys);
            const double total = vdot + qv + P * P / (2.0 * ctrl.gamma * k3);
            const double scale =
                std::abs(vdot) + qv + P * P / (2.0 * ctrl.gamma * k3) + 1e-12;
            CHECK(std::abs(total) / scale < 1e-10);
        }
    }
}

TEST_CASE("analytic V gradient agrees with finite differences") {
    Rng rng(27);
    PhysicalParams phys{1.0, 0.6, 0.3};
    ControllerParams ctrl{2.4, 0.9, 1.4, 0.15};
    const int m = 3;
    const Eigen::MatrixXd Qv = V_matrix(phys, ctrl, m);
    const SystemState s = random_system(rng, m);
    const Eigen::VectorXd x = pack_state(s);
    const Eigen::VectorXd grad = 2.0 * (Qv * x);
    const double h = 1e-6;
    for (int i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (V_value(unpack_state(xp), ctrl, phys) -
                           V_value(unpack_state(xm), ctrl, phys)) /
                          (2.0 * h);
        CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("mode energy examples and upper bound") {
    PhysicalParams phys{1.0, 1.0, 0.0};
    CHECK(mode_energy(1, ModalState(2), phys) == 0.0);
    ModalState s(1);
    s.a[0] = 1.0;
    CHECK(mode_energy(1, s, phys) ==
          doctest::Approx(155.98324095209301).epsilon(1e-13));  // pi^2(1+pi^2)+pi^4/2

    Rng rng(28);
    PhysicalParams ph2{0.8, 1.2, 0.5};
    const double C = (ph2.mu + ph2.kappa) * (ph2.mu + ph2.kappa) / ph2.sigma + 1.5;
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 1 + trial % 6;
        ModalState st(m);
        for (int i = 0; i < m; ++i) {
            st.a[i] = rng.uniform(-1, 1);
            st.adot[i] = rng.uniform(-1, 1);
        }
        for (int n = 1; n <= m; ++n) {
            const double n2p2 = n * n * kPi * kPi;
            const double b = st.a[n - 1];
            const double c = st.adot[n - 1] / (n * kPi);
            const double cap = C * n2p2 * (c * c + (1.0 + ph2.sigma * n2p2) * b * b);
            CHECK(mode_energy(n, st, ph2) <= cap * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("coercivity margin closed form at m = 0") {
    PhysicalParams phys;
    ControllerParams ctrl{4.0, 1.0, 1.0, 0.5};  // Q irrelevant at m = 0
    const CoercivityResult res = coercivity_margin(phys, ctrl, 0);
    // min eig of [[k + c k^2, c k], [c k, c]] with c = (gamma-2)/(2k) = 1, k = 1
    const double expect = (3.0 - std::sqrt(5.0)) / 2.0;
    CHECK(res.A_min == doctest::Approx(expect).epsilon(1e-12));
    // eigenpair consistency: q(witness)/N(witness) = A_min
    const SystemState w = unpack_state(res.witness);
    const Eigen::VectorXd nd = coercivity_norm_diagonal(0);
    const double nval = res.witness.dot(nd.asDiagonal() * res.witness);
    CHECK(q_value(w, ctrl, phys) / nval == doctest::Approx(res.A_min).epsilon(1e-10));
}

TEST_CASE("coercivity positive above gamma* and monotone in m") {
    Rng rng(29);
    for (int draw = 0; draw < 6; ++draw) {
        PhysicalParams phys{rng.uniform(0.4, 2.0), rng.uniform(0.3, 1.5),
                            rng.uniform(0.0, 0.8)};
        const ControllerParams ctrl = feasible_ctrl(rng, phys, 1.05, 2.5);
        double prev = std::numeric_limits<double>::infinity();
        std::string sequence;
        for (int m : {1, 2, 4, 8, 16}) {
            const CoercivityResult res = coercivity_margin(phys, ctrl, m);
            sequence += (sequence.empty() ? "" : ", ") + std::to_string(res.A_min);
            INFO("A_min over m in {1,2,4,8,16}: ", sequence);
            CHECK(res.A_min > 0.0);
            CHECK(res.A_min <= prev * (1.0 + 1e-10) + 1e-12);
            prev = res.A_min;
            // witness realizes the margin
            const Eigen::VectorXd nd = coercivity_norm_diagonal(m);
            const double nval = res.witness.dot(nd.asDiagonal() * res.witness);
            const double ray = q_value(unpack_state(res.witness), ctrl, phys) / nval;
            CHECK(ray == doctest::Approx(res.A_min).epsilon(1e-10).scale(1.0));
        }
    }
}

TEST_CASE("augmented coercivity margin equals coercivity with doubled gain") {
    Rng rng(30);
    for (int draw = 0; draw < 8; ++draw) {
        PhysicalParams phys{rng.uniform(0.4, 2.0), rng.uniform(0.3, 1.5),
                            rng.uniform(0.0, 0.8)};
        const ControllerParams ctrl = feasible_ctrl(rng, phys, 0.55, 2.0);
        for (int m : {0, 2, 5}) {
            ControllerParams doubled = ctrl;
            doubled.gamma = 2.0 * ctrl.gamma;
            const double lhs = augmented_coercivity_margin(phys, ctrl, m);
            const double rhs = coercivity_margin(phys, doubled, m).A_min;
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("augmented coercivity margin positive above gamma*/2 and in the tank-only case") {
    Rng rng(31);
    for (int draw = 0; draw < 8; ++draw) {
        PhysicalParams phys{rng.uniform(0.4, 2.0), rng.uniform(0.3, 1.5),
                            rng.uniform(0.0, 0.8)};
        const ControllerParams ctrl = feasible_ctrl(rng, phys, 0.55, 2.5);
        CHECK(augmented_coercivity_margin(phys, ctrl, 4) > 0.0);
    }
    // Q = 0, m = 0: positive for every gamma > 1
    PhysicalParams phys;
    for (double gamma : {1.05, 1.5, 4.0, 50.0}) {
        ControllerParams ctrl{gamma, 1.0, 0.7, 0.0};
        CHECK(augmented_coercivity_margin(phys, ctrl, 0) > 0.0);
    }
}

TEST_CASE("jacobi eigensolver agrees with the QR reference") {
    Rng rng(32);
    const int n = 12;
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) A(i, j) = A(j, i) = rng.uniform(-1, 1);
    const SymEigResult got = jacobi_eigensolver(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(A);
    for (int i = 0; i < n; ++i) {
        CHECK(got.values[i] == doctest::Approx(ref.eigenvalues()[i]).epsilon(1e-11));
        CHECK((A * got.vectors.col(i) - got.values[i] * got.vectors.col(i)).norm() < 1e-10);
    }
}
