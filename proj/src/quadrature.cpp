#include "mht/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mht {

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double tol, int max_depth) {
    QuadResult out;
    out.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, tol, &out.error);
    return out;
}

double gauss_legendre5(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 5>::integrate(f, a, b);
}

}  // namespace mht
