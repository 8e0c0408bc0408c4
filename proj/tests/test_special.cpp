#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/special_functions/bessel.hpp>

#include "gtasep/special.hpp"

using namespace gtasep;

TEST(Airy, ThreeRoutesAgree) {
    for (double z = -6.0; z <= 6.0; z += 0.37) {
        double b = airy_ai(z), c = airy_ai_contour(z), s = airy_ai_series(z);
        EXPECT_NEAR(c, b, 1e-13 * std::max(1.0, std::abs(b))) << z;
        EXPECT_NEAR(s, b, 1e-12) << z;
    }
}

TEST(Airy, ContourInDecayingTail) {
    for (double z : {8.0, 15.0, 30.0}) EXPECT_NEAR(airy_ai_contour(z) / airy_ai(z), 1.0, 1e-11) << z;
    for (double z : {-9.5, -11.0}) EXPECT_NEAR(airy_ai_contour(z), airy_ai(z), 1e-12);
}

TEST(Airy, KnownValues) {
    EXPECT_NEAR(airy_ai(0.0), 0.355028053887817239, 1e-16);
    EXPECT_NEAR(airy_ai(-2.338107410459767), 0.0, 1e-15);  // first zero
    EXPECT_NEAR(airy_ai(1.0), 0.135292416312881416, 1e-16);
}

TEST(Bessel, SeriesContourAndBoost) {
    for (int n : {0, 1, 2, 5})
        for (double x : {0.1, 1.0, 4.0, 9.0}) {
            double want = boost::math::cyl_bessel_i(n, x);
            EXPECT_NEAR(bessel_i(n, x) / want, 1.0, 1e-13);
            EXPECT_NEAR(bessel_i_contour(n, x) / want, 1.0, 1e-12);
        }
    EXPECT_EQ(bessel_i(-2, 1.5), bessel_i(2, 1.5));
}

TEST(Bessel, TransportFunction) {
    EXPECT_NEAR(bessel_transport(0.7, 0.0), 0.7, 1e-16);
    for (double r : {0.3, 1.0, 5.0})
        for (double u : {1e-6, 0.5, 3.0}) {
            double want = std::sqrt(r / u) * boost::math::cyl_bessel_i(1, 2 * std::sqrt(u * r));
            EXPECT_NEAR(bessel_transport(r, u) / want, 1.0, 1e-12);
        }
}

TEST(Normal, Values) {
    EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-16);
    EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-15);
    EXPECT_NEAR(normal_cdf(-8.0), 6.22096057427178e-16, 1e-27);
    EXPECT_NEAR(normal_pdf(0.0), 1 / std::sqrt(2 * M_PI), 1e-16);
}
