#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "dweit/model.hpp"
#include "dweit/model_json.hpp"

namespace dweit {
namespace {

bool has_issue(const ParamError& e, ErrorCode code, const std::string& field)
{
    for (const auto& issue : e.issues())
        if (issue.code == code && issue.field == field)
            return true;
    return false;
}

TEST(ValidateParams, FillsCoherenceDecayFromExcitedDecay)
{
    SystemParams raw;
    raw.gamma_a = 2.0;
    const SystemParams p = validate_params(raw);
    ASSERT_TRUE(p.gamma_ab.has_value());
    EXPECT_EQ(*p.gamma_ab, 1.0);
}

TEST(ValidateParams, RejectsNegativeExcitedDecay)
{
    SystemParams raw;
    raw.gamma_a = -1.0;
    try {
        validate_params(raw);
        FAIL() << "expected NonPositiveRate";
    } catch (const ParamError& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonPositiveRate);
        EXPECT_TRUE(has_issue(e, ErrorCode::NonPositiveRate, "gamma_a"));
    }
}

TEST(ValidateParams, AcceptsFigureThreeSetUnchanged)
{
    SystemParams raw;
    raw.omega_ac = 2.0;
    raw.gamma_a = 2.0;
    raw.gamma_ab = 1.0;
    raw.g_b = 2e-4;
    raw.g_c = 2e-4;
    raw.phi_prep = 0.0;
    EXPECT_EQ(validate_params(raw), raw);
}

TEST(ValidateParams, RejectsEveryNonFiniteField)
{
    for (const auto& field : kScalarFields) {
        SystemParams raw;
        raw.*(field.member) = std::numeric_limits<double>::quiet_NaN();
        try {
            validate_params(raw);
            FAIL() << field.name;
        } catch (const ParamError& e) {
            EXPECT_TRUE(has_issue(e, ErrorCode::NonFinite, std::string(field.name))) << field.name;
        }
    }
    SystemParams raw;
    raw.gamma_ab = std::numeric_limits<double>::infinity();
    EXPECT_THROW(validate_params(raw), ParamError);
}

TEST(ValidateParams, CollectsAllViolations)
{
    SystemParams raw;
    raw.gamma_a = 0.0;
    raw.gamma_ab = -1.0;
    raw.omega_ab = 0.0;
    raw.g_a = -1.0;
    raw.g_c = -1.0;
    try {
        validate_params(raw);
        FAIL();
    } catch (const ParamError& e) {
        EXPECT_EQ(e.issues().size(), 5u);
        EXPECT_TRUE(has_issue(e, ErrorCode::NonPositiveRate, "gamma_ab"));
        EXPECT_TRUE(has_issue(e, ErrorCode::NegativeTunneling, "g_c"));
    }
}

TEST(ValidateParams, LosslessModeOnlyRelaxesCoherenceDecay)
{
    SystemParams raw;
    raw.gamma_ab = 0.0;
    EXPECT_THROW(validate_params(raw), ParamError);
    EXPECT_EQ(*validate_params(raw, Validation::AllowLossless).gamma_ab, 0.0);
    raw.gamma_ab = -0.5;
    EXPECT_THROW(validate_params(raw, Validation::AllowLossless), ParamError);
}

SystemParams random_params(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_real_distribution<double> pos(0.01, 5.0);
    SystemParams p;
    for (const auto& field : kScalarFields)
        p.*(field.member) = u(rng);
    p.gamma_a = pos(rng);
    p.omega_ab = pos(rng) * 1e-3;
    p.g_a = std::abs(p.g_a);
    p.g_b = std::abs(p.g_b);
    p.g_c = std::abs(p.g_c);
    if (rng() % 2)
        p.gamma_ab = pos(rng);
    return p;
}

TEST(ValidateParams, IsIdempotent)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const SystemParams once = validate_params(random_params(rng));
        EXPECT_EQ(validate_params(once), once);
    }
}

TEST(ConfigFormat, RoundTripsBitExactly)
{
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200; ++i) {
        const SystemParams p = validate_params(random_params(rng));
        const std::string text = params_to_json(p).dump();
        const SystemParams back = validate_params(params_from_json(nlohmann::json::parse(text)));
        for (const auto& field : kScalarFields)
            EXPECT_EQ(std::bit_cast<std::uint64_t>(back.*(field.member)),
                      std::bit_cast<std::uint64_t>(p.*(field.member)))
                << field.name;
        EXPECT_EQ(std::bit_cast<std::uint64_t>(*back.gamma_ab), std::bit_cast<std::uint64_t>(*p.gamma_ab));
    }
}

TEST(ConfigFormat, UnknownKeyIsAnError)
{
    const auto j = nlohmann::json::parse(R"({"omega_ac": 2, "gamma_b": 1})");
    try {
        params_from_json(j);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownKey);
    }
    constexpr std::string_view extra[] = {"gamma_b"};
    EXPECT_NO_THROW(params_from_json(j, extra));
}

TEST(ConfigFormat, NonNumericValueIsBadConfig)
{
    try {
        params_from_json(nlohmann::json::parse(R"({"omega_ac": "2"})"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BadConfig);
    }
    EXPECT_THROW(params_from_json(nlohmann::json::parse("[1, 2]")), Error);
}

TEST(Detunings, MeanFieldShiftsEnterAsSubstitutions)
{
    SystemParams p;
    p.delta_mu = 0.5;
    p.u_bb = 0.2;
    p.u_cb = 0.6;
    p.u_ab = 0.05;
    EXPECT_DOUBLE_EQ(p.shifted_probe_detuning(1.0), 1.0 - 0.1 + 0.05);
    EXPECT_DOUBLE_EQ(p.shifted_control_detuning(), 0.5 - 0.3 + 0.05);
}

TEST(FigureParams, MatchTheFigureFamily)
{
    const SystemParams p = figure_params(2e-4, 2e-4);
    EXPECT_EQ(p.omega_ac, 2.0);
    EXPECT_EQ(p.gamma_a, 2.0);
    EXPECT_EQ(p.coherence_decay(), 1.0);
    EXPECT_EQ(p.g_b, 2e-4);
    EXPECT_EQ(p.g_c, 2e-4);
}

}  // namespace
}  // namespace dweit
