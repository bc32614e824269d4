#include "fd/rational.hpp"

#include <cctype>
#include <cmath>
#include <ostream>

namespace fd {

Rational Rational::from_double_exact(double x) {
    if (!std::isfinite(x))
        throw ConfigError("non-finite value has no rational representation");
    // mpq_class(double) is the exact dyadic value of the bit pattern.
    return Rational(mpq_class(x));
}

std::string Rational::str() const {
    if (q_.get_den() == 1) return q_.get_num().get_str();
    return q_.get_num().get_str() + "/" + q_.get_den().get_str();
}

std::ostream& operator<<(std::ostream& os, const Rational& a) {
    return os << a.str();
}

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

} // namespace

Rational Rational::parse(const std::string& text) {
    // strip surrounding whitespace
    size_t lo = text.find_first_not_of(" \t");
    size_t hi = text.find_last_not_of(" \t");
    if (lo == std::string::npos)
        throw ConfigError("empty string is not a rational number");
    std::string s = text.substr(lo, hi - lo + 1);

    bool neg = false;
    if (s[0] == '+' || s[0] == '-') {
        neg = (s[0] == '-');
        s.erase(0, 1);
    }
    if (s.empty()) throw ConfigError("'" + text + "' is not a rational number");

    Rational out;
    if (size_t slash = s.find('/'); slash != std::string::npos) {
        std::string num = s.substr(0, slash);
        std::string den = s.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den) || den == "0")
            throw ConfigError("'" + text + "' is not a valid p/q rational");
        out = Rational(mpq_class(mpz_class(num), mpz_class(den)));
    } else if (size_t dot = s.find('.'); dot != std::string::npos) {
        std::string ip = s.substr(0, dot);
        std::string fp = s.substr(dot + 1);
        if (ip.empty()) ip = "0";
        if (fp.empty()) fp = "0";
        if (!all_digits(ip) || !all_digits(fp))
            throw ConfigError("'" + text + "' is not a valid decimal");
        mpz_class den(1);
        for (size_t i = 0; i < fp.size(); ++i) den *= 10;
        mpz_class num = mpz_class(ip) * den + mpz_class(fp);
        out = Rational(mpq_class(num, den));
    } else {
        if (!all_digits(s))
            throw ConfigError("'" + text + "' is not a rational number");
        out = Rational(mpq_class(mpz_class(s)));
    }
    return neg ? -out : out;
}

} // namespace fd
