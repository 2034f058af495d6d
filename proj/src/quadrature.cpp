#include "blowup/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include "blowup/errors.hpp"

namespace blowup {

namespace {
template <unsigned N>
GLRule make_rule() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& xs = G::abscissa();
    const auto& ws = G::weights();
    GLRule r;
    // boost stores the non-negative half; mirror it
    for (std::size_t i = xs.size(); i-- > 0;) {
        if (xs[i] == 0.0) continue;
        r.x.push_back(-xs[i]);
        r.w.push_back(ws[i]);
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        r.x.push_back(xs[i]);
        r.w.push_back(ws[i]);
    }
    return r;
}
}  // namespace

const GLRule& gauss_legendre(int n) {
    static const GLRule r8 = make_rule<8>();
    static const GLRule r12 = make_rule<12>();
    static const GLRule r16 = make_rule<16>();
    static const GLRule r20 = make_rule<20>();
    static const GLRule r30 = make_rule<30>();
    switch (n) {
        case 8: return r8;
        case 12: return r12;
        case 16: return r16;
        case 20: return r20;
        case 30: return r30;
        default: throw ValidationError("gauss_legendre: unsupported order");
    }
}

}  // namespace blowup
