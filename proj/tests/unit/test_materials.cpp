#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "homsim/errors.hpp"
#include "homsim/materials.hpp"

using namespace homsim;
using fixtures::materials;

TEST_SUITE("materials") {

TEST_CASE("refractive and group index match the high-precision oracle")
{
    const auto& ktp = materials().at("KTP");
    CHECK(refractive_index(ktp, Micrometers{0.81}, Celsius{25}) == doctest::Approx(1.8443672263927).epsilon(1e-11));
    CHECK(group_index(ktp, Micrometers{0.81}, Celsius{25}) == doctest::Approx(1.90952927950688).epsilon(1e-10));
    CHECK(group_index(ktp, Micrometers{0.81}, Celsius{22}) == doctest::Approx(1.90945590081109).epsilon(1e-10));
    CHECK(group_index(ktp, Micrometers{0.8108}, Celsius{22}) == doctest::Approx(1.90926865364326).epsilon(1e-10));
    CHECK(group_index(ktp, Micrometers{0.8108}, Celsius{26}) == doctest::Approx(1.90936636765035).epsilon(1e-10));

    const auto& slt = materials().at("SLT");
    CHECK(group_index(slt, Micrometers{0.81}, Celsius{22}) == doctest::Approx(2.22000031460249).epsilon(1e-10));
    CHECK(group_index(slt, Micrometers{0.81}, Celsius{25}) == doctest::Approx(2.22017554441798).epsilon(1e-10));
    CHECK(group_index(materials().at("CLN"), Micrometers{0.81}, Celsius{22}) ==
          doctest::Approx(2.25088177108053).epsilon(1e-10));
    CHECK(group_index(materials().at("Schott-glass"), Micrometers{0.81}, Celsius{22}) ==
          doctest::Approx(1.53208138822425).epsilon(1e-10));

    const auto& bk7 = materials().at("BK7");
    CHECK(group_index(bk7, Micrometers{0.81}, Celsius{22}) == doctest::Approx(1.52626460476467).epsilon(1e-10));
    CHECK(refractive_index(bk7, Micrometers{0.5875618}, Celsius{22}) ==
          doctest::Approx(1.51680003450059).epsilon(1e-11));
}

TEST_CASE("vacuum test material has unit index")
{
    const auto& v = materials().at("vacuum-test");
    CHECK(refractive_index(v, Micrometers{0.81}, Celsius{25}) == 1.0);
    CHECK(group_index(v, Micrometers{0.81}, Celsius{25}) == 1.0);
}

TEST_CASE("group index exceeds phase index in the normal-dispersion window")
{
    for (const auto& name : {"KTP", "SLT", "CLN", "Schott-glass", "BK7"}) {
        const auto& m = materials().at(name);
        for (double l = 0.6; l <= 1.6; l += 0.1)
            CHECK(group_index(m, Micrometers{l}, Celsius{25}) > refractive_index(m, Micrometers{l}, Celsius{25}));
    }
}

TEST_CASE("analytic and finite-difference group index agree")
{
    double worst = 0.0;
    for (const auto& name : materials().names()) {
        const auto& m = materials().at(name);
        for (double l = 0.5; l <= 1.6; l += 0.05)
            for (double T : {20.0, 25.0, 80.0}) {
                const double a = group_index(m, Micrometers{l}, Celsius{T});
                const double n = group_index_numeric(m, Micrometers{l}, Celsius{T});
                worst = std::max(worst, std::abs(a - n));
            }
    }
    CHECK(worst <= 1e-7);
}

TEST_CASE("heating raises the KTP index")
{
    const auto& ktp = materials().at("KTP");
    CHECK(group_index(ktp, Micrometers{0.81}, Celsius{60}) > group_index(ktp, Micrometers{0.81}, Celsius{25}));
}

TEST_CASE("thermal expansion matches the oracle and composes")
{
    const auto& ktp = materials().at("KTP");
    CHECK(thermal_expansion(ktp, Millimeters{30.12}, Celsius{26}, 1.0).value ==
          doctest::Approx(0.000202796599032024).epsilon(1e-9));
    CHECK(thermal_expansion(ktp, Millimeters{30.12}, Celsius{25}, 175.0).value ==
          doctest::Approx(0.045462375).epsilon(1e-9));

    const Sample s = fixtures::sample("KTP", 30.12, 25);
    const Sample direct = at_temperature(s, Celsius{150});
    const Sample staged = at_temperature(at_temperature(s, Celsius{100}), Celsius{150});
    CHECK(staged.length.value == doctest::Approx(direct.length.value).epsilon(1e-14));
    CHECK(at_temperature(direct, Celsius{25}).length.value == doctest::Approx(30.12).epsilon(1e-14));
    CHECK(thermal_expansion(ktp, Millimeters{30.12}, Celsius{40}, 0.0).value == 0.0);
}

TEST_CASE("evaluation outside the valid range is rejected")
{
    const auto& ktp = materials().at("KTP");
    CHECK_THROWS_AS(group_index(ktp, Micrometers{0.2}, Celsius{25}), RangeError);
    CHECK_THROWS_AS(group_index(ktp, Micrometers{0.81}, Celsius{400}), RangeError);
    CHECK_THROWS_AS(thermal_expansion(ktp, Millimeters{1}, Celsius{150}, 100.0), RangeError);
}

TEST_CASE("every shipped material carries a source line")
{
    CHECK(materials().size() >= 6);
    for (const auto& name : materials().names()) CHECK_FALSE(materials().at(name).source.empty());
    CHECK_THROWS_AS(materials().at("unobtainium"), LookupError);
}

TEST_CASE("material file parsing reports problems with their location")
{
    const std::string good = R"(materials:
  - name: flat
    form: sellmeier
    coeffs: {constant: 2.25}
    thermo: []
    expansion: []
    range: {wavelength_um: [0.3, 2.0], temperature_C: [0, 100]}
    source: test record
)";
    const auto reg = parse_materials(good, "good.yaml");
    CHECK(refractive_index(reg.at("flat"), Micrometers{1.0}, Celsius{25}) == doctest::Approx(1.5));

    CHECK_THROWS_WITH_AS(parse_materials("", "empty.yaml"), "empty.yaml: material file is empty", ParseError);
    CHECK_THROWS_WITH_AS(parse_materials("materials: []", "none.yaml"), "none.yaml: no materials defined", ParseError);

    std::string unknown = good;
    unknown.replace(unknown.find("source:"), 7, "colour: red\n    source:");
    CHECK_THROWS_WITH_AS(parse_materials(unknown, "u.yaml"), doctest::Contains("unknown field 'material.colour'"),
                         ParseError);
    CHECK_THROWS_WITH_AS(parse_materials(unknown, "u.yaml"), doctest::Contains("u.yaml:8"), ParseError);

    std::string missing = good;
    missing.erase(missing.find("    source:"));
    CHECK_THROWS_WITH_AS(parse_materials(missing, "m.yaml"), doctest::Contains("missing field 'source'"), ParseError);

    std::string doubled = good + good.substr(good.find("  - name"));
    CHECK_THROWS_WITH_AS(parse_materials(doubled, "d.yaml"), doctest::Contains("duplicate material name 'flat'"),
                         ParseError);

    std::string form = good;
    form.replace(form.find("form: sellmeier"), 15, "form: cauchy");
    CHECK_THROWS_WITH_AS(parse_materials(form, "f.yaml"), doctest::Contains("unknown form 'cauchy'"), ParseError);
}

}
