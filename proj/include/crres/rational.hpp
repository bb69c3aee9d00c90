#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <string>

namespace crres {

using Rat = boost::multiprecision::cpp_rational;

/// Exact complex rational: the coefficient field Q(i) of the symbolic layer.
struct CRat {
    Rat re{0};
    Rat im{0};

    CRat() = default;
    CRat(long n) : re(n) {}
    CRat(Rat r) : re(std::move(r)) {}
    CRat(Rat r, Rat i) : re(std::move(r)), im(std::move(i)) {}

    static CRat iunit() { return CRat(Rat(0), Rat(1)); }

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_one() const { return re == 1 && im == 0; }
    bool is_real() const { return im == 0; }

    CRat conj() const { return CRat(re, -im); }

    CRat operator-() const { return CRat(-re, -im); }
    CRat operator+(const CRat& o) const { return CRat(re + o.re, im + o.im); }
    CRat operator-(const CRat& o) const { return CRat(re - o.re, im - o.im); }
    CRat operator*(const CRat& o) const {
        return CRat(re * o.re - im * o.im, re * o.im + im * o.re);
    }
    CRat operator/(const CRat& o) const {
        Rat n = o.re * o.re + o.im * o.im;
        return CRat((re * o.re + im * o.im) / n, (im * o.re - re * o.im) / n);
    }
    CRat& operator+=(const CRat& o) { re += o.re; im += o.im; return *this; }
    CRat& operator*=(const CRat& o) { *this = *this * o; return *this; }

    bool operator==(const CRat& o) const { return re == o.re && im == o.im; }
    bool operator!=(const CRat& o) const { return !(*this == o); }
    bool operator<(const CRat& o) const {
        if (re != o.re) return re < o.re;
        return im < o.im;
    }

    std::complex<double> to_complex() const {
        return {re.convert_to<double>(), im.convert_to<double>()};
    }
};

std::string to_string(const Rat& r);
std::string to_string(const CRat& c);

} // namespace crres
