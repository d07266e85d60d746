#include "qaoa/fermion.hpp"

#include <cmath>
#include <stdexcept>

namespace qaoa {

using cd = std::complex<double>;

Eigen::MatrixXd QuadraticHamiltonian::bdg_matrix() const {
    const int nn = n();
    Eigen::MatrixXd m(2 * nn, 2 * nn);
    m.topLeftCorner(nn, nn) = a;
    m.topRightCorner(nn, nn) = b;
    m.bottomLeftCorner(nn, nn) = -b;
    m.bottomRightCorner(nn, nn) = -a;
    return m;
}

std::pair<QuadraticHamiltonian, QuadraticHamiltonian> build_quadratic(const ChainSpec& spec) {
    validate_spec(spec);
    const int n = spec.n_sites;

    QuadraticHamiltonian hz;
    hz.a = Eigen::MatrixXd::Zero(n, n);
    hz.b = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        const int j2 = (j + 1) % n;
        // boundary bond enters with opposite sign: c_{N+1} = -c_1 (even parity)
        const double coup = (j == n - 1) ? -spec.couplings[j] : spec.couplings[j];
        hz.a(j, j2) += -coup;
        hz.a(j2, j) += -coup;
        hz.b(j, j2) += -coup;
        hz.b(j2, j) += +coup;
    }

    QuadraticHamiltonian hx;
    hx.a = 2.0 * Eigen::MatrixXd::Identity(n, n);
    hx.b = Eigen::MatrixXd::Zero(n, n);
    hx.constant = -static_cast<double>(n);

    return {hz, hx};
}

BdgEigensystem bdg_eigensystem(const QuadraticHamiltonian& h) {
    if ((h.a - h.a.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
        (h.b + h.b.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("bdg_eigensystem: malformed quadratic Hamiltonian");
    const Eigen::MatrixXd m = h.bdg_matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("bdg_eigensystem: diagonalization failed");
    BdgEigensystem eig;
    eig.eigenvalues = solver.eigenvalues();
    eig.eigenvectors = solver.eigenvectors();
    return eig;
}

double GaussianState::isometry_error() const {
    const int nn = n();
    const Eigen::MatrixXcd gram = u.adjoint() * u + v.adjoint() * v;
    return (gram - Eigen::MatrixXcd::Identity(nn, nn)).cwiseAbs().maxCoeff();
}

GaussianState init_vacuum(int n) {
    GaussianState state;
    state.u = Eigen::MatrixXcd::Identity(n, n);
    state.v = Eigen::MatrixXcd::Zero(n, n);
    return state;
}

void evolve(GaussianState& state, const BdgEigensystem& eig, double theta) {
    // Q is real orthogonal, so the basis changes stay in real GEMMs on the
    // split frame; only the mode phases mix the two parts
    const int n = state.n();
    Eigen::MatrixXd fr(2 * n, n);
    Eigen::MatrixXd fi(2 * n, n);
    fr.topRows(n) = state.u.real();
    fr.bottomRows(n) = state.v.real();
    fi.topRows(n) = state.u.imag();
    fi.bottomRows(n) = state.v.imag();

    Eigen::MatrixXd tr = eig.eigenvectors.transpose() * fr;
    Eigen::MatrixXd ti = eig.eigenvectors.transpose() * fi;
    for (int i = 0; i < 2 * n; ++i) {
        const double c = std::cos(theta * eig.eigenvalues(i));
        const double s = -std::sin(theta * eig.eigenvalues(i));
        const Eigen::RowVectorXd row_r = tr.row(i);
        tr.row(i) = c * row_r - s * ti.row(i);
        ti.row(i) = s * row_r + c * ti.row(i);
    }
    fr.noalias() = eig.eigenvectors * tr;
    fi.noalias() = eig.eigenvectors * ti;

    state.u.real() = fr.topRows(n);
    state.u.imag() = fi.topRows(n);
    state.v.real() = fr.bottomRows(n);
    state.v.imag() = fi.bottomRows(n);
}

void evolve_field(GaussianState& state, double beta) {
    state.u *= std::polar(1.0, -2.0 * beta);
    state.v *= std::polar(1.0, +2.0 * beta);
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> correlators(const GaussianState& state) {
    Eigen::MatrixXcd g = state.v * state.v.adjoint();
    Eigen::MatrixXcd f = state.u * state.v.adjoint();
    return {std::move(g), std::move(f)};
}

MeasurementRecord measure(const GaussianState& state, const ChainSpec& spec) {
    validate_spec(spec);
    const int n = spec.n_sites;
    if (state.n() != n) throw std::invalid_argument("fermion measure: dimension mismatch");
    const auto [g, f] = correlators(state);
    MeasurementRecord rec;
    rec.zz_bonds.resize(n);
    rec.x_sites.resize(n);
    for (int j = 0; j < n; ++j) rec.x_sites[j] = 1.0 - 2.0 * g(j, j).real();
    for (int j = 0; j < n; ++j) {
        const int j2 = (j + 1) % n;
        double zz = 2.0 * (g(j, j2).real() - f(j, j2).real());
        if (j == n - 1) zz = -zz;  // antiperiodic boundary bond
        rec.zz_bonds[j] = zz;
    }
    for (int j = 0; j < n; ++j) {
        rec.hz -= spec.couplings[j] * rec.zz_bonds[j];
        rec.hx -= rec.x_sites[j];
    }
    rec.energy = rec.hz + spec.h_target * rec.hx;
    return rec;
}

FermionPlan::FermionPlan(const ChainSpec& s) : spec(s) {
    auto [hz, hx] = build_quadratic(spec);
    (void)hx;  // H_x evolution is diagonal, no eigensystem needed
    hz_eig = bdg_eigensystem(hz);
}

void FermionPlan::apply_layer(GaussianState& state, double gamma, double beta) const {
    evolve(state, hz_eig, gamma);
    evolve_field(state, beta);
}

std::pair<std::vector<MeasurementRecord>, double> run_schedule_fermion(const ChainSpec& spec,
                                                                       const Schedule& sched) {
    validate_schedule(sched);
    const FermionPlan plan(spec);
    GaussianState state = init_vacuum(spec.n_sites);
    std::vector<MeasurementRecord> trace;
    trace.reserve(sched.gammas.size());
    for (int t = 0; t < sched.depth(); ++t) {
        plan.apply_layer(state, sched.gammas[t], sched.betas[t]);
        trace.push_back(measure(state, spec));
    }
    const double e_p = trace.empty() ? 0.0 : trace.back().energy;
    return {std::move(trace), e_p};
}

// ---- momentum-space fast path (uniform chains) ----

UniformKPlan::UniformKPlan(const ChainSpec& s) : spec(s) {
    validate_spec(spec);
    if (!spec.is_uniform())
        throw std::invalid_argument("uniform_k: spec must have uniform couplings");
    const int n = spec.n_sites;
    k.resize(n / 2);
    for (int m = 0; m < n / 2; ++m) k[m] = (2.0 * m + 1.0) * M_PI / n;
}

UniformKState UniformKPlan::init() const {
    UniformKState state;
    state.psi.assign(k.size(), Eigen::Vector2cd(1.0, 0.0));
    return state;
}

namespace {

// exp(-i theta H) for hermitian 2x2 H, via H = c0 I + m . sigma
Eigen::Matrix2cd expm_2x2(const Eigen::Matrix2cd& h, double theta) {
    const double c0 = 0.5 * (h(0, 0).real() + h(1, 1).real());
    const double mz = 0.5 * (h(0, 0).real() - h(1, 1).real());
    const double mx = h(0, 1).real();
    const double my = -h(0, 1).imag();
    const double r = std::sqrt(mx * mx + my * my + mz * mz);
    const cd phase = std::polar(1.0, -theta * c0);
    Eigen::Matrix2cd out;
    if (r < 1e-300) {
        out = phase * Eigen::Matrix2cd::Identity();
        return out;
    }
    const double cth = std::cos(theta * r);
    const double sth = std::sin(theta * r);
    const cd i(0.0, 1.0);
    out(0, 0) = phase * (cth - i * sth * (mz / r));
    out(0, 1) = phase * (-i * sth * (mx - i * my) / r);
    out(1, 0) = phase * (-i * sth * (mx + i * my) / r);
    out(1, 1) = phase * (cth + i * sth * (mz / r));
    return out;
}

}  // namespace

void UniformKPlan::apply_layer(UniformKState& state, double gamma, double beta) const {
    const double j = spec.couplings.front();
    const cd i(0.0, 1.0);
    for (std::size_t m = 0; m < k.size(); ++m) {
        Eigen::Matrix2cd hz;
        hz << 0.0, 2.0 * i * j * std::sin(k[m]),
              -2.0 * i * j * std::sin(k[m]), -4.0 * j * std::cos(k[m]);
        Eigen::Matrix2cd hx;
        hx << -2.0, 0.0, 0.0, 2.0;
        state.psi[m] = expm_2x2(hx, beta) * (expm_2x2(hz, gamma) * state.psi[m]);
    }
}

MeasurementRecord UniformKPlan::measure(const UniformKState& state) const {
    const int n = spec.n_sites;
    const double j = spec.couplings.front();
    const cd i(0.0, 1.0);
    double ez = 0.0;
    double ex = 0.0;
    for (std::size_t m = 0; m < k.size(); ++m) {
        const Eigen::Vector2cd& p = state.psi[m];
        Eigen::Matrix2cd hz;
        hz << 0.0, 2.0 * i * j * std::sin(k[m]),
              -2.0 * i * j * std::sin(k[m]), -4.0 * j * std::cos(k[m]);
        ez += (p.adjoint() * hz * p)(0, 0).real();
        ex += -2.0 * std::norm(p(0)) + 2.0 * std::norm(p(1));
    }
    MeasurementRecord rec;
    const double zz = (j > 0.0) ? -ez / (n * j) : 0.0;
    rec.zz_bonds.assign(n, zz);
    rec.x_sites.assign(n, -ex / n);
    rec.hz = ez;
    rec.hx = ex;
    rec.energy = rec.hz + spec.h_target * rec.hx;
    return rec;
}

std::pair<std::vector<MeasurementRecord>, double> run_schedule_uniform_k(const ChainSpec& spec,
                                                                         const Schedule& sched) {
    validate_schedule(sched);
    const UniformKPlan plan(spec);
    UniformKState state = plan.init();
    std::vector<MeasurementRecord> trace;
    trace.reserve(sched.gammas.size());
    for (int t = 0; t < sched.depth(); ++t) {
        plan.apply_layer(state, sched.gammas[t], sched.betas[t]);
        trace.push_back(plan.measure(state));
    }
    const double e_p = trace.empty() ? 0.0 : trace.back().energy;
    return {std::move(trace), e_p};
}

}  // namespace qaoa
