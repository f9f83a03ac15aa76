#include "svinvopt/sim.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "svinvopt/quadrature.hpp"

namespace svinvopt {

namespace {

constexpr double kPi = std::numbers::pi;

double merge_tol(double T) { return 1e-12 * std::max(1.0, T); }

// Sorted union of the uniform grids and extra points, clipped to [0, T].
std::vector<double> make_grid(double T, std::span<const double> uniform_steps,
                              std::span<const double> extra) {
    std::vector<double> g;
    for (double step : uniform_steps) {
        if (!(step > 0.0)) continue;
        const long long nmax = static_cast<long long>(std::ceil(T / step)) + 1;
        for (long long j = 0; j * step < T - merge_tol(T) && j <= nmax; ++j)
            g.push_back(j * step);
    }
    g.push_back(0.0);
    g.push_back(T);
    for (double t : extra)
        if (t > merge_tol(T) && t < T - merge_tol(T)) g.push_back(t);
    std::sort(g.begin(), g.end());
    std::vector<double> out;
    for (double t : g)
        if (out.empty() || t - out.back() > merge_tol(T)) out.push_back(t);
    out.back() = T;
    return out;
}

bool on_grid(double t, double step, double tol) {
    if (step <= 0.0) return true;
    const double j = std::round(t / step);
    return std::abs(t - j * step) <= tol;
}

double spectral_radius_of(const Eigen::MatrixXd& M) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

InputSignal InputSignal::constant(double value) { return {{0.0}, {value}}; }

void InputSignal::validate() const {
    if (breakpoints.empty() || breakpoints.size() != values.size())
        throw std::invalid_argument("InputSignal: breakpoints/values size mismatch");
    if (breakpoints.front() != 0.0)
        throw std::invalid_argument("InputSignal: breakpoints must start at 0");
    for (size_t i = 0; i + 1 < breakpoints.size(); ++i)
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw std::invalid_argument("InputSignal: breakpoints must increase");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("InputSignal: non-finite value");
}

double InputSignal::value_at(double t) const {
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
    const size_t idx = (it == breakpoints.begin())
                           ? 0
                           : static_cast<size_t>(it - breakpoints.begin()) - 1;
    return values[idx];
}

double InputSignal::square_integral(double T) const {
    double acc = 0.0;
    for (size_t i = 0; i < breakpoints.size(); ++i) {
        const double lo = breakpoints[i];
        if (lo >= T) break;
        const double hi = (i + 1 < breakpoints.size()) ? std::min(breakpoints[i + 1], T) : T;
        acc += values[i] * values[i] * (hi - lo);
    }
    return acc;
}

DivergenceError::DivergenceError(double t)
    : std::runtime_error("simulation diverged at t = " + std::to_string(t)), time(t) {}

HorizonTooShort::HorizonTooShort(double ratio, double tol)
    : std::runtime_error("horizon too short: V(T)/V(0) = " + std::to_string(ratio) +
                         " > " + std::to_string(tol)),
      tail_ratio(ratio) {}

Trajectory simulate_open_loop(const PhysicalParams& phys, const SystemState& init,
                              const InputSignal& f, double T, double dt_out,
                              const ControllerParams* ctrl) {
    phys.validate();
    init.modal.validate();
    f.validate();
    if (!(T > 0.0) || !(dt_out > 0.0))
        throw std::invalid_argument("simulate_open_loop: T and dt_out must be > 0");
    if (ctrl) ctrl->validate();

    const int m = init.order();
    const std::vector<double> grid =
        make_grid(T, std::array<double, 1>{dt_out}, f.breakpoints);

    // per-mode constants
    std::vector<double> n2p2(m), dmp(m), bt(m);
    for (int n = 1; n <= m; ++n) {
        n2p2[n - 1] = n * n * kPi * kPi;
        dmp[n - 1] = mode_damping(phys, n);
        bt[n - 1] = beta(n);
    }
    const double lam_max =
        (m > 0) ? std::max(mode_damping(phys, m), std::sqrt(mode_stiffness(phys, m))) : 1.0;

    const QuadratureRule& gl = gauss_legendre(8);
    struct PropSet {
        double hs = -1.0;
        std::vector<ModePropagator> full;               // per mode
        std::vector<std::vector<ModePropagator>> node;  // [node][mode]
    };
    PropSet props;
    auto prepare = [&](double hs) {
        if (props.hs == hs) return;
        props.hs = hs;
        props.full.clear();
        props.node.assign(gl.size(), {});
        for (int n = 1; n <= m; ++n) props.full.emplace_back(n, phys, hs);
        for (int j = 0; j < gl.size(); ++j) {
            props.node[j].reserve(m);
            for (int n = 1; n <= m; ++n)
                props.node[j].emplace_back(n, phys, std::max(gl.nodes[j] * hs, 1e-300));
        }
    };

    Trajectory traj;
    traj.energy.emplace();
    const size_t npts = grid.size();
    auto reserve_all = [&](auto&... vs) { (vs.reserve(npts), ...); };
    reserve_all(traj.times, traj.states, traj.f_values, traj.cost_q_integral,
                traj.cost_f_integral, traj.V_series);

    SystemState x = init;
    double cq = 0.0, cf = 0.0;
    Trajectory::EnergySeries& es = *traj.energy;
    double i_phi = 0.0, i_phix = 0.0, i_phixx = 0.0, i_u = 0.0, i_ux = 0.0;
    double i_fa = 0.0, i_fad = 0.0;

    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.f_values.push_back(f.value_at(t));
        traj.cost_q_integral.push_back(cq);
        traj.cost_f_integral.push_back(cf);
        traj.V_series.push_back(ctrl ? V_value(x, *ctrl, phys) : 0.0);
        es.int_phi_L2.push_back(i_phi);
        es.int_phi_x_L2.push_back(i_phix);
        es.int_phi_xx_L2.push_back(i_phixx);
        es.int_u_L2.push_back(i_u);
        es.int_u_x_L2.push_back(i_ux);
        es.forcing_a.push_back(i_fa);
        es.forcing_adot.push_back(i_fad);
    };
    record(grid[0]);

    for (size_t seg = 0; seg + 1 < grid.size(); ++seg) {
        const double t0 = grid[seg];
        const double h = grid[seg + 1] - t0;
        const double fbar = f.value_at(t0);
        if (!std::isfinite(fbar))
            throw std::invalid_argument("simulate_open_loop: non-finite input");
        const int nsub = std::max(1, static_cast<int>(std::ceil(h * lam_max)));
        const double hs = h / nsub;
        prepare(hs);
        for (int sub = 0; sub < nsub; ++sub) {
            // Gauss accumulation of the quadratic integrands on the exact flow
            for (int j = 0; j < gl.size(); ++j) {
                const double tau = gl.nodes[j] * hs;
                const double wq = gl.weights[j] * hs;
                double s_phi = 0, s_phix = 0, s_phixx = 0, s_u = 0, s_ux = 0;
                double s_a = 0, s_ad = 0;
                for (int i = 0; i < m; ++i) {
                    const ModePair mp = props.node[j][i].step(
                        {x.modal.a[i], x.modal.adot[i]}, fbar);
                    s_phi += mp.a * mp.a;
                    s_phix += n2p2[i] * mp.a * mp.a;
                    s_phixx += n2p2[i] * n2p2[i] * mp.a * mp.a;
                    s_u += mp.adot * mp.adot / n2p2[i];
                    s_ux += mp.adot * mp.adot;
                    s_a += bt[i] * dmp[i] * mp.a / n2p2[i];
                    s_ad += bt[i] * mp.adot / n2p2[i];
                }
                i_phi += wq * s_phi;
                i_phix += wq * s_phix;
                i_phixx += wq * s_phixx;
                i_u += wq * s_u;
                i_ux += wq * s_ux;
                i_fa += wq * fbar * s_a;
                i_fad += wq * fbar * s_ad;
                if (ctrl) {
                    const double xi_nd = x.tank.xi + x.tank.w * tau - 0.5 * fbar * tau * tau;
                    const double w_nd = x.tank.w - fbar * tau;
                    const double wk = w_nd + ctrl->k * xi_nd;
                    const double L = s_a + (ctrl->r + 1.0) / ctrl->r * s_ad;
                    const double k3 = ctrl->k * ctrl->k * ctrl->k;
                    double qv = ctrl->k * xi_nd * xi_nd +
                                (ctrl->gamma - 2.0) / (2.0 * ctrl->k) * wk * wk;
                    qv += ctrl->Q * (phys.kappa * s_u + phys.mu * s_ux +
                                     phys.kappa * ctrl->r * s_phi +
                                     ctrl->r * (phys.sigma * phys.kappa + phys.mu) * s_phix +
                                     phys.mu * phys.sigma * ctrl->r * s_phixx);
                    qv += 0.5 * ctrl->gamma * k3 * ctrl->r * ctrl->r * ctrl->Q * ctrl->Q * L * L -
                          ctrl->gamma * ctrl->k * ctrl->Q * ctrl->r * wk * L;
                    cq += wq * qv;
                    cf += wq * fbar * fbar / (2.0 * ctrl->gamma * k3);
                }
            }
            // exact advance over the substep
            for (int i = 0; i < m; ++i) {
                const ModePair mp =
                    props.full[i].step({x.modal.a[i], x.modal.adot[i]}, fbar);
                x.modal.a[i] = mp.a;
                x.modal.adot[i] = mp.adot;
            }
            x.tank.xi += x.tank.w * hs - 0.5 * fbar * hs * hs;
            x.tank.w -= fbar * hs;
        }
        record(grid[seg + 1]);
    }
    return traj;
}

namespace {

struct ExpmStepper {
    double h = -1.0;
    int nsub = 1;
    Eigen::MatrixXd E;                   // exp(Maug * h/nsub)
    std::vector<Eigen::MatrixXd> nodes;  // exp(Maug * c_j * h/nsub)
    std::vector<double> wq;              // GL weights * h/nsub
};

ExpmStepper build_stepper(const Eigen::MatrixXd& Maug, double h, double lam_max) {
    ExpmStepper st;
    st.h = h;
    st.nsub = std::max(1, static_cast<int>(std::ceil(lam_max * h / 25.0)));
    const double hs = h / st.nsub;
    const double lh = lam_max * hs;
    const int npts = lh <= 1.0 ? 8 : lh <= 4.0 ? 12 : lh <= 10.0 ? 16 : 24;
    const QuadratureRule& gl = gauss_legendre(npts);
    st.E = (Maug * hs).exp();
    st.nodes.reserve(npts);
    st.wq.reserve(npts);
    for (int j = 0; j < npts; ++j) {
        st.nodes.push_back((Maug * (gl.nodes[j] * hs)).exp());
        st.wq.push_back(gl.weights[j] * hs);
    }
    return st;
}

}  // namespace

Trajectory simulate_closed_loop(const PhysicalParams& phys, const ControllerParams& ctrl,
                                const SystemState& init, double T, const SimOptions& opt,
                                const InputSignal* additive_input) {
    phys.validate();
    ctrl.validate();
    init.modal.validate();
    if (!(T > 0.0) || !(opt.dt > 0.0))
        throw std::invalid_argument("simulate_closed_loop: T and dt must be > 0");
    if (additive_input) additive_input->validate();

    if (ctrl.Q > 0.0) {
        // Stability hypotheses: assumption (A) and gamma > gamma*/2. Simulation
        // proceeds either way; the stability claims just may not apply.
        const double margin = assumption_A_margin(phys, ctrl.r, ctrl.k, ctrl.Q);
        if (!(margin > 0.0)) {
            std::fprintf(stderr,
                         "warning: assumption (A) violated (margin %g); "
                         "stability is not guaranteed\n", margin);
        } else if (!(ctrl.gamma > 0.5 * gamma_star(phys, ctrl.r, ctrl.k, ctrl.Q))) {
            std::fprintf(stderr,
                         "warning: gamma <= gamma*/2; stability is not guaranteed\n");
        }
    }

    const int m = init.order();
    const int D = 2 + 2 * m;
    const double k3 = ctrl.k * ctrl.k * ctrl.k;
    const Eigen::MatrixXd M = closed_loop_matrix(phys, ctrl, m, opt.feedback_scale);
    const Eigen::VectorXd p = feedback_row(phys, ctrl, m);
    const Eigen::VectorXd B = input_vector(m);
    const Eigen::MatrixXd Qq = q_matrix(phys, ctrl, m);
    const Eigen::MatrixXd Qv = V_matrix(phys, ctrl, m);

    const std::vector<double> empty;
    std::span<const double> bps =
        additive_input ? std::span<const double>(additive_input->breakpoints) : empty;
    std::array<double, 2> steps{opt.dt, opt.dt_out};
    const std::vector<double> grid = make_grid(T, steps, bps);
    const double tol = merge_tol(T);

    Trajectory traj;
    traj.excess_integral.emplace();

    Eigen::VectorXd x = pack_state(init);
    const double x0_scale = std::max(x.cwiseAbs().maxCoeff(), 1.0);
    double cq = 0.0, cf = 0.0, ce = 0.0;

    auto delta_at = [&](double t) {
        return additive_input ? additive_input->value_at(t) : 0.0;
    };
    auto f_applied = [&](const Eigen::VectorXd& y, double dl) {
        return opt.feedback_scale * p.dot(y) + dl;
    };
    auto record = [&](double t) {
        if (opt.dt_out > 0.0 && !(t == 0.0 || std::abs(t - T) <= tol ||
                                  on_grid(t, opt.dt_out, tol)))
            return;
        traj.times.push_back(t);
        traj.states.push_back(unpack_state(x));
        traj.f_values.push_back(f_applied(x, delta_at(t)));
        traj.cost_q_integral.push_back(cq);
        traj.cost_f_integral.push_back(cf);
        traj.V_series.push_back(x.dot(Qv * x));
        traj.excess_integral->push_back(ce);
    };
    auto check_finite = [&](double t) {
        const double nrm = x.cwiseAbs().maxCoeff();
        if (!std::isfinite(nrm) || nrm > opt.divergence_factor * x0_scale)
            throw DivergenceError(t);
    };

    record(grid[0]);

    if (opt.method == Method::rk4) {
        Eigen::VectorXd s1(D), s2(D), s3(D), s4(D), ytmp(D);
        for (size_t seg = 0; seg + 1 < grid.size(); ++seg) {
            const double h = grid[seg + 1] - grid[seg];
            const double dl = delta_at(grid[seg]);
            auto rhs = [&](const Eigen::VectorXd& y, Eigen::VectorXd& dy, double& dq,
                           double& df, double& de) {
                dy.noalias() = M * y;
                dy.noalias() += B * dl;
                dq = y.dot(Qq * y);
                const double fv = f_applied(y, dl);
                df = fv * fv / (2.0 * ctrl.gamma * k3);
                const double ex = fv - p.dot(y);
                de = ex * ex / (2.0 * ctrl.gamma * k3);
            };
            double q1, q2, q3, q4, f1, f2, f3, f4, e1, e2, e3, e4;
            rhs(x, s1, q1, f1, e1);
            ytmp = x + 0.5 * h * s1;
            rhs(ytmp, s2, q2, f2, e2);
            ytmp = x + 0.5 * h * s2;
            rhs(ytmp, s3, q3, f3, e3);
            ytmp = x + h * s3;
            rhs(ytmp, s4, q4, f4, e4);
            x += (h / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
            cq += (h / 6.0) * (q1 + 2.0 * q2 + 2.0 * q3 + q4);
            cf += (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
            ce += (h / 6.0) * (e1 + 2.0 * e2 + 2.0 * e3 + e4);
            check_finite(grid[seg + 1]);
            record(grid[seg + 1]);
        }
        return traj;
    }

    // expm path: exact propagation of the input-augmented state, Gauss
    // quadrature of the quadratic outputs on the exact flow within each step.
    Eigen::MatrixXd Maug = Eigen::MatrixXd::Zero(D + 1, D + 1);
    Maug.topLeftCorner(D, D) = M;
    Maug.topRightCorner(D, 1) = B;
    const double lam_max = std::max(spectral_radius_of(M), 1.0);

    std::vector<ExpmStepper> steppers;
    auto stepper_for = [&](double h) -> const ExpmStepper& {
        for (const auto& st : steppers)
            if (st.h == h) return st;
        steppers.push_back(build_stepper(Maug, h, lam_max));
        return steppers.back();
    };

    Eigen::VectorXd y(D + 1), ys(D + 1);
    y.head(D) = x;
    for (size_t seg = 0; seg + 1 < grid.size(); ++seg) {
        const double h = grid[seg + 1] - grid[seg];
        y.head(D) = x;
        y[D] = delta_at(grid[seg]);
        const ExpmStepper& st = stepper_for(h);
        for (int sub = 0; sub < st.nsub; ++sub) {
            for (size_t j = 0; j < st.nodes.size(); ++j) {
                ys.noalias() = st.nodes[j] * y;
                const auto xs = ys.head(D);
                cq += st.wq[j] * xs.dot(Qq * xs);
                const double fv = f_applied(xs, ys[D]);
                cf += st.wq[j] * fv * fv / (2.0 * ctrl.gamma * k3);
                const double ex = fv - p.dot(xs);
                ce += st.wq[j] * ex * ex / (2.0 * ctrl.gamma * k3);
            }
            ys.noalias() = st.E * y;
            y = ys;
        }
        x = y.head(D);
        check_finite(grid[seg + 1]);
        record(grid[seg + 1]);
    }
    return traj;
}

CostResult total_cost_J(const Trajectory& traj, double tail_tol) {
    if (traj.size() == 0) throw std::invalid_argument("total_cost_J: empty trajectory");
    CostResult res;
    res.V0 = traj.V_series.front();
    res.V_terminal = traj.V_series.back();
    res.tail_ratio = res.V_terminal / std::max(res.V0, 1e-12);
    res.J = traj.cost_q_integral.back() + traj.cost_f_integral.back();
    if (res.tail_ratio > tail_tol) throw HorizonTooShort(res.tail_ratio, tail_tol);
    return res;
}

}  // namespace svinvopt
