#include "nelson/core.hpp"
#include "nelson/errors.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace nelson;

TEST_CASE("diffusion constants per mode") {
    StringParams p;
    p.alpha_prime = 0.5;
    CHECK(diffusion(p, 3) == 1.0);
    CHECK(diffusion(p, 0) == 0.5);
    p.alpha_prime = 1.0;
    CHECK(diffusion(p, 1) == 2.0);
    CHECK_THROWS_AS(diffusion(p, -1), ValidationError);
}

TEST_CASE("diffusion is mode independent for n >= 1 and halves at n = 0") {
    for (double ap : {0.1, 0.5, 1.0, 3.7}) {
        StringParams p;
        p.alpha_prime = ap;
        for (int n = 1; n <= 50; ++n) CHECK(diffusion(p, n) == diffusion(p, 1));
        CHECK(diffusion(p, 0) == diffusion(p, 1) / 2);
    }
}

TEST_CASE("parameter validation") {
    StringParams p;
    p.alpha_prime = 1.0;
    p.dims = 26;
    p.mode_cutoff = 4;
    CHECK(validate(p).ok());

    p.alpha_prime = -1.0;
    auto r = validate(p);
    REQUIRE_FALSE(r.ok());
    CHECK(r.errors == std::vector<std::string>{"alpha_prime must be positive"});

    p.alpha_prime = 1.0;
    p.dims = 2;
    r = validate(p);
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0] == "no transverse directions");

    SECTION("every violation is listed") {
        StringParams bad;
        bad.alpha_prime = 0.0;
        bad.dims = 1;
        bad.mode_cutoff = 0;
        bad.p_plus = -2.0;
        CHECK(validate(bad).errors.size() == 4);
        CHECK_THROWS_AS(require_valid(bad), ValidationError);
    }
}

TEST_CASE("mode state level and validation") {
    StringParams p;
    p.mode_cutoff = 3;
    auto s = ModeStateSpec::ground(p);
    CHECK(s.level() == 0);
    CHECK(s.zero_mode_momentum.size() == 24);
    s.set_occupation(1, 1, 2);
    s.set_occupation(3, 5, 1);
    CHECK(s.level() == 5);
    CHECK(validate(s, p).ok());
    s.set_occupation(4, 1, 1);
    CHECK_FALSE(validate(s, p).ok());
    s.set_occupation(4, 1, 0);
    CHECK(validate(s, p).ok());
    s.set_occupation(2, 25, 1);
    CHECK_FALSE(validate(s, p).ok());
}

TEST_CASE("config text round trip") {
    const auto cfg = parse_config("# comment\nalpha_prime = 0.25\n dims=10\nmode_cutoff = 3 # trailing\n"
                                  "p_plus = 2\nseed = 18446744073709551615\n");
    CHECK(cfg.params.alpha_prime == 0.25);
    CHECK(cfg.params.dims == 10);
    CHECK(cfg.params.mode_cutoff == 3);
    CHECK(cfg.params.p_plus == 2.0);
    CHECK(cfg.seed == 18446744073709551615ull);

    const auto again = parse_config(format_config(cfg));
    CHECK(format_config(again) == format_config(cfg));

    CHECK_THROWS_AS(parse_config("alpha = 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("dims = twenty\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("dims\n"), ValidationError);
}

TEST_CASE("config file loading") {
    const auto path = std::filesystem::temp_directory_path() / "nelson_core_test.cfg";
    {
        std::ofstream f(path);
        f << "alpha_prime = 2\nseed = 7\n";
    }
    const auto cfg = load_config(path);
    CHECK(cfg.params.alpha_prime == 2.0);
    CHECK(cfg.seed == 7);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_config(path), ValidationError);
}

TEST_CASE("shortest double formatting round trips") {
    for (double v : {0.1, 1e-3, 1.0 / 3.0, 6.02214076e23, -0.0}) CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(0.5) == "0.5");
}
