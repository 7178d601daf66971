// Minimal end-to-end use of the library: generate a travelling-wave dataset,
// run exact DMD and randomized DMD, and compare frequencies and reconstructions.

#include <algorithm>
#include <cstdio>

#include "rdmd/rdmd.hpp"

int main() {
    using namespace rdmd;

    SechConfig cfg;
    cfg.n_space = 2000;
    cfg.m_time = 501;
    const auto ds = gen_sech_complex(cfg);
    std::printf("snapshots: %td features x %td pairs, dt = %.5f\n", ds.pair.n_features(), ds.pair.n_snapshots(),
                ds.truth.dt);

    double t_exact = 0.0, t_random = 0.0;
    DmdSpectrum exact, random;
    t_exact = time_seconds([&] { exact = exact_dmd(ds.pair, 20); });
    t_random = time_seconds([&] { random = rdmd::rdmd(ds.pair, 20, 42); });
    std::printf("exact DMD %.3f s, rDMD %.3f s\n", t_exact, t_random);

    std::printf("\n%4s %12s %12s %12s\n", "j", "gamma_j", "Im omega", "|error|");
    for (const auto& e : truth_errors(random, ds.truth)) {
        const auto f = continuous_spectrum(random, ds.truth.dt);
        const auto it = std::find_if(f.begin(), f.end(), [&](const ModeFrequency& m) { return m.index == e.spectrum_index; });
        std::printf("%4td %12.6f %12.6f %12.3e\n", e.truth_index + 1, ds.truth.gammas[static_cast<std::size_t>(e.truth_index)],
                    it == f.end() ? 0.0 : it->omega.imag(), e.omega_err);
    }

    std::printf("\nrelative reconstruction error: exact %.3e, rDMD %.3e\n", reconstruction_error(exact, ds.pair.x),
                reconstruction_error(random, ds.pair.x));

    const double horizon = static_cast<double>(ds.pair.n_snapshots());
    const CVec future = forecast(random, horizon);
    const CVec reference = ds.pair.y.data().col(ds.pair.n_snapshots() - 1);
    std::printf("forecast at t = %.0f steps vs last snapshot: relative error %.3e\n", horizon,
                (future - reference).norm() / reference.norm());
    return 0;
}
