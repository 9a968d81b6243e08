#include "flagbundle/config.hpp"

#include "flagbundle/reporting.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>

using namespace flagbundle;

TEST_CASE("minimal single-block Hardy config") {
    OperatorConfig cfg = parse_config_text(R"({
        "truncation": 32,
        "blocks": [{"type": "power", "lambda": 1.0}]
    })");
    CHECK(cfg.blocks.size() == 1);
    CHECK(cfg.truncation == 32);
    CHECK(cfg.blocks[0].tag == WeightTag::Power);
    CHECK(cfg.blocks[0].lambda == 1.0);
    FlagOperator T = build_operator(cfg);
    CHECK(T.block_count() == 1);
}

TEST_CASE("two blocks with a polynomial coupling") {
    OperatorConfig cfg = parse_config_text(R"({
        "truncation": 24,
        "blocks": [{"type": "power", "lambda": 1.0}, {"type": "power", "lambda": 2.0}],
        "couplings": [{"poly": [[2, 0], [1, 0]]}],
        "grid": {"radii": [0.2, 0.4], "angles": 4},
        "tolerances": {"stencil_h": 1e-3}
    })");
    REQUIRE(cfg.couplings.size() == 1);
    REQUIRE(cfg.couplings[0].symbol.has_value());
    CHECK(cfg.couplings[0].symbol->size() == 2);
    CHECK((*cfg.couplings[0].symbol)[0] == Complex(2));
    CHECK(cfg.grid.radii.size() == 2);
    CHECK(cfg.tol.stencil_h == 1e-3);
    FlagOperator T = build_operator(cfg);
    CHECK(T.block_count() == 2);
}

TEST_CASE("coupling count mismatch is reported with a document path") {
    bool threw = false;
    try {
        parse_config_text(R"({
            "truncation": 16,
            "blocks": [{"type": "power", "lambda": 1.0},
                       {"type": "power", "lambda": 1.0},
                       {"type": "power", "lambda": 2.0}],
            "couplings": [{"poly": [[1, 0]]}]
        })");
    } catch (const SchemaError& e) {
        threw = true;
        bool mentions = false;
        for (const auto& v : e.violations)
            if (v.find("/couplings") != std::string::npos && v.find("2") != std::string::npos)
                mentions = true;
        CHECK(mentions);
    }
    CHECK(threw);
}

TEST_CASE("multiple violations are all collected") {
    try {
        parse_config_text(R"({
            "truncation": 16,
            "blocks": [{"type": "power", "lambda": -1.0},
                       {"type": "explicit", "weights": [1, 0]}],
            "conditionA": {"bogus": [[1, 0]]}
        })");
        CHECK(false);
    } catch (const SchemaError& e) {
        CHECK(e.violations.size() >= 3);
    }
}

TEST_CASE("condition-A keys are one-based in configs") {
    OperatorConfig cfg = parse_config_text(R"({
        "truncation": 16,
        "blocks": [{"type": "power", "lambda": 1.0},
                   {"type": "power", "lambda": 1.0},
                   {"type": "power", "lambda": 1.0}],
        "couplings": [{"poly": [[1, 0]]}, {"poly": [[1, 0]]}],
        "conditionA": {"1,3": [[0.5, 0]]}
    })");
    REQUIRE(cfg.condA.count({0, 2}) == 1);
    CHECK(cfg.condA.at({0, 2})[0] == Complex(0.5));
}

TEST_CASE("matrix CSV round trip") {
    Mat m(3, 3);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = fbtest::random_unit_box();
    m(1, 2) = Complex(0);
    std::string path = "test_matrix_roundtrip.csv";
    write_matrix_csv(path, m);
    Mat back = read_matrix_csv(path, 3, 3);
    CHECK((back - m).norm() < 1e-15);
    std::remove(path.c_str());
}

TEST_CASE("explicit matrix couplings load from CSV") {
    KernelSpace hardy(power_weights(1.0, 8));
    Mat coup = multiplier(hardy, hardy, Poly{Complex(1), Complex(0.5)}).entries.adjoint();
    write_matrix_csv("test_coupling.csv", coup);
    OperatorConfig cfg = parse_config_text(R"({
        "truncation": 8,
        "blocks": [{"type": "power", "lambda": 1.0}, {"type": "power", "lambda": 1.0}],
        "couplings": [{"matrix": "test_coupling.csv"}]
    })");
    FlagOperator T = build_operator(cfg);
    CHECK((T.coupling(0) - coup).norm() < 1e-15);
    std::remove("test_coupling.csv");
}

TEST_CASE("atomic writes and digests are deterministic") {
    std::string a = grid_csv({{0.5, 0.25, Complex(0.4, 0.3)}}, {1.25});
    std::string b = grid_csv({{0.5, 0.25, Complex(0.4, 0.3)}}, {1.25});
    CHECK(digest_hex(a) == digest_hex(b));
    CHECK(a.find("radius,angle,value") == 0);
}
