#ifndef EEOPT_OPTIM_HPP
#define EEOPT_OPTIM_HPP

#include <cmath>
#include <cstddef>
#include <utility>

namespace eeopt {

struct ScalarMax {
    double x = 0.0;
    double value = 0.0;
};

/// Golden-section maximization of a unimodal f on [lo, hi].
/// Stops when the bracket width drops below x_tol (absolute on the search
/// axis; searches over log-transformed variables pass log-domain tolerances).
template <class F>
ScalarMax golden_section_max(F&& f, double lo, double hi, double x_tol,
                             std::size_t max_iter = 200) {
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (std::size_t it = 0; it < max_iter && (b - a) > x_tol; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return fc > fd ? ScalarMax{c, fc} : ScalarMax{d, fd};
}

}  // namespace eeopt

#endif
