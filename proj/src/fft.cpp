#include "fracdrift/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "fracdrift/errors.hpp"

namespace fracdrift {
namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(int d, std::size_t n, int sign) {
        std::lock_guard lock(mu_);
        const auto key = std::make_tuple(d, n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        const std::size_t total = d == 1 ? n : n * n;
        fftw_complex* scratch = fftw_alloc_complex(total);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fftw_plan plan = d == 1 ? fftw_plan_dft_1d(static_cast<int>(n), scratch, scratch, sign, flags)
                                : fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), scratch,
                                                   scratch, sign, flags);
        fftw_free(scratch);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mu_;
    std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void run(const GridSpec& g, std::span<cplx> data, int sign) {
    if (data.size() != g.size()) throw ConfigError("fft: buffer length does not match grid");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(cache().get(g.d, g.n, sign), p, p);
}

}  // namespace

void fft_forward(const GridSpec& g, std::span<cplx> data) { run(g, data, FFTW_FORWARD); }

void fft_inverse(const GridSpec& g, std::span<cplx> data) {
    run(g, data, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(g.size());
    for (auto& c : data) c *= scale;
}

SpectralField to_spectral(const Field& f) {
    f.grid.validate();
    if (f.values.size() != f.grid.size()) throw ConfigError("to_spectral: length does not match grid");
    SpectralField F{f.grid, std::vector<cplx>(f.values.begin(), f.values.end())};
    fft_forward(F.grid, F.coeffs);
    return F;
}

Field from_spectral(const SpectralField& F) {
    F.grid.validate();
    if (F.coeffs.size() != F.grid.size())
        throw ConfigError("from_spectral: length does not match grid");
    std::vector<cplx> buf = F.coeffs;
    fft_inverse(F.grid, buf);
    Field f(F.grid);
    for (std::size_t i = 0; i < buf.size(); ++i) f[i] = buf[i].real();
    return f;
}

std::vector<cplx> multiplier_table(const GridSpec& g, const Symbol& symbol) {
    const std::size_t total = g.size();
    std::vector<cplx> raw(total);
    for (std::size_t i = 0; i < total; ++i) raw[i] = symbol(g.wavevector(i));
    std::vector<cplx> table(total);
    for (std::size_t i = 0; i < total; ++i) table[i] = 0.5 * (raw[i] + std::conj(raw[g.mirror_index(i)]));
    return table;
}

Field apply_multiplier(const Field& f, std::span<const cplx> table) {
    if (table.size() != f.grid.size()) throw ConfigError("apply_multiplier: table does not match grid");
    SpectralField F = to_spectral(f);
    for (std::size_t i = 0; i < table.size(); ++i) F.coeffs[i] *= table[i];
    return from_spectral(F);
}

Field apply_multiplier(const Field& f, const Symbol& symbol) {
    return apply_multiplier(f, multiplier_table(f.grid, symbol));
}

}  // namespace fracdrift
