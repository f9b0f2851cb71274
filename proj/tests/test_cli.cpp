#include <cmath>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include <rydrx/io.hpp>
#include <rydrx/scenario.hpp>

#include "support/systems.hpp"

using namespace rydrx;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

// Smallest document the schema accepts: species, a 3-level ladder, one
// probe/coupler pair, and an optical depth.
const char* kMinimal = R"({
  "schema_version": 1,
  "species": "Rb87",
  "levels": [
    {"label": "g"},
    {"label": "e", "dephasing_hz": 1.0e6},
    {"label": "r"}
  ],
  "decays": [{"from": "e", "to": "g", "rate_hz": 6.0666e6}],
  "drives": [
    {"label": "probe", "role": "probe", "lower": "g", "upper": "e", "rabi_hz": 0.5e6},
    {"label": "coupler", "role": "coupler", "lower": "e", "upper": "r", "rabi_hz": 5.0e6}
  ],
  "optical_depth": 1.2
})";

std::string repo_path(const std::string& rel) {
  return std::string(RYDRX_SOURCE_DIR) + "/" + rel;
}

}  // namespace

TEST_CASE("minimal scenario parses with defaults filled", "[cli]") {
  Scenario s = parse_scenario(kMinimal);
  CHECK(s.schema_version == 1);
  CHECK(s.species == "Rb87");
  CHECK(s.seed == 1);
  CHECK_FALSE(s.vapor.present);
  CHECK(s.optical_depth == 1.2);
  REQUIRE(s.levels.size() == 3);
  CHECK(s.levels[0].dephasing_hz == 0.0);
  CHECK(s.levels[1].dephasing_hz == 1.0e6);
  REQUIRE(s.drives.size() == 2);
  CHECK(s.drives[0].detuning_hz == 0.0);
  CHECK(s.drives[0].phase_rad == 0.0);
  CHECK(s.drives[0].envelope.kind == EnvelopeSpec::Kind::Constant);
  CHECK_FALSE(s.scan);
  CHECK_FALSE(s.pulse);
  CHECK_FALSE(s.phase);
  CHECK_FALSE(s.demod);
  CHECK_FALSE(s.estimate);
}

TEST_CASE("echo-back serialization is a fixed point", "[cli]") {
  std::string first = serialize_scenario(parse_scenario(kMinimal));
  std::string second = serialize_scenario(parse_scenario(first));
  CHECK(first == second);
  CHECK(first.back() == '\n');
}

TEST_CASE("unknown keys are rejected with their path", "[cli]") {
  // A detuning without its unit suffix must name the offending location.
  std::string text = kMinimal;
  text.replace(text.find("\"rabi_hz\": 0.5e6"), 16,
               "\"rabi_hz\": 0.5e6, \"detuning\": 3.0");
  CHECK_THROWS_WITH(parse_scenario(text),
                    ContainsSubstring("drives[0]") &&
                        ContainsSubstring("detuning") &&
                        ContainsSubstring("detuning_hz"));

  std::string root = kMinimal;
  root.replace(root.find("\"optical_depth\""), 15,
               "\"optical_dept\": 1.0, \"optical_depth\"");
  CHECK_THROWS_WITH(parse_scenario(root), ContainsSubstring("optical_dept"));
}

TEST_CASE("structural validation names the failing element", "[cli]") {
  SECTION("species is required") {
    std::string text = kMinimal;
    text.replace(text.find("\"species\": \"Rb87\","), 19, "");
    CHECK_THROWS_AS(parse_scenario(text), ConfigError);
  }
  SECTION("duplicate level labels") {
    std::string text = kMinimal;
    text.replace(text.find("{\"label\": \"r\"}"), 14, "{\"label\": \"g\"}");
    CHECK_THROWS_WITH(parse_scenario(text), ContainsSubstring("g"));
  }
  SECTION("decay to an unknown label") {
    std::string text = kMinimal;
    text.replace(text.find("\"to\": \"g\""), 9, "\"to\": \"x\"");
    CHECK_THROWS_WITH(parse_scenario(text),
                      ContainsSubstring("decays[0]") && ContainsSubstring("x"));
  }
  SECTION("unknown drive role") {
    std::string text = kMinimal;
    text.replace(text.find("\"role\": \"coupler\""), 17, "\"role\": \"pump\"");
    CHECK_THROWS_WITH(parse_scenario(text),
                      ContainsSubstring("role") && ContainsSubstring("pump"));
  }
  SECTION("negative seed") {
    std::string text = kMinimal;
    text.replace(text.find("\"optical_depth\": 1.2"), 20,
                 "\"optical_depth\": 1.2, \"seed\": -4");
    CHECK_THROWS_WITH(parse_scenario(text), ContainsSubstring("seed"));
  }
  SECTION("scan needs stop above start") {
    std::string text = kMinimal;
    text.replace(text.find("\"optical_depth\": 1.2"), 20,
                 "\"optical_depth\": 1.2, "
                 "\"scan\": {\"start_hz\": 5.0, \"stop_hz\": 5.0, \"points\": 11}");
    CHECK_THROWS_WITH(parse_scenario(text), ContainsSubstring("scan"));
  }
}

TEST_CASE("envelope accepts exactly one shape", "[cli]") {
  std::string both = kMinimal;
  both.replace(
      both.find("\"rabi_hz\": 5.0e6"), 16,
      "\"rabi_hz\": 5.0e6, \"envelope\": {"
      "\"nodes\": [{\"t_s\": 0.0, \"value\": 1.0}], "
      "\"rectangle\": {\"t_on_s\": 0.0, \"t_off_s\": 1.0e-6}}");
  CHECK_THROWS_WITH(parse_scenario(both), ContainsSubstring("envelope"));

  std::string neither = kMinimal;
  neither.replace(neither.find("\"rabi_hz\": 5.0e6"), 16,
                  "\"rabi_hz\": 5.0e6, \"envelope\": {}");
  CHECK_THROWS_WITH(parse_scenario(neither), ContainsSubstring("envelope"));
}

TEST_CASE("phase block wants one sweep axis", "[cli]") {
  auto with_phase = [](const std::string& inner) {
    std::string text = kMinimal;
    text.replace(text.find("\"optical_depth\": 1.2"), 20,
                 "\"optical_depth\": 1.2, \"phase\": {"
                 "\"rf_frequency_hz\": 1.0e10, \"detuning_a_hz\": -2.0e8, "
                 "\"detuning_b_hz\": 2.0e8, \"optical_rabi_a_hz\": 5.0e6, "
                 "\"optical_rabi_b_hz\": 5.0e6, \"dipole_a_ea0\": 100.0, "
                 "\"dipole_b_ea0\": 100.0, \"e_field_v_per_m\": 1.0, "
                 "\"rf_phase_rad\": 0.7" + inner + "}");
    return text;
  };
  const std::string scan =
      ", \"scan\": {\"start_rad\": 0.0, \"stop_rad\": 6.3, \"points\": 32}";
  const std::string translations =
      ", \"translations\": {\"start_m\": 0.0, \"stop_m\": 0.015, \"points\": 32}";

  CHECK_NOTHROW(parse_scenario(with_phase(scan)));
  CHECK_NOTHROW(parse_scenario(with_phase(translations)));
  CHECK_THROWS_WITH(parse_scenario(with_phase("")),
                    ContainsSubstring("scan") &&
                        ContainsSubstring("translations"));
  CHECK_THROWS_WITH(parse_scenario(with_phase(scan + translations)),
                    ContainsSubstring("scan") &&
                        ContainsSubstring("translations"));
}

TEST_CASE("demod block wants one baseband source", "[cli]") {
  auto with_demod = [](const std::string& inner) {
    std::string text = kMinimal;
    text.replace(text.find("\"optical_depth\": 1.2"), 20,
                 "\"optical_depth\": 1.2, \"demod\": {"
                 "\"carrier_rabi_hz\": 1.5e7, \"depth\": 0.25" + inner + "}");
    return text;
  };
  const std::string sine =
      ", \"sine\": {\"baseband_hz\": 1.0e3, \"periods\": 2, "
      "\"samples_per_period\": 48}";
  const std::string csv =
      ", \"baseband_csv\": \"tone.csv\", \"sample_rate_hz\": 9.6e4";

  CHECK_NOTHROW(parse_scenario(with_demod(sine)));
  CHECK_NOTHROW(parse_scenario(with_demod(csv)));
  CHECK_THROWS_WITH(parse_scenario(with_demod("")),
                    ContainsSubstring("sine"));
  CHECK_THROWS_WITH(parse_scenario(with_demod(sine + csv)),
                    ContainsSubstring("sine"));
}

TEST_CASE("builders convert config units to angular ones", "[cli]") {
  std::string text = kMinimal;
  text.replace(text.find("\"optical_depth\": 1.2"), 20,
               "\"optical_depth\": 1.2, "
               "\"scan\": {\"start_hz\": -6.0e7, \"stop_hz\": 6.0e7, \"points\": 3}");
  Scenario s = parse_scenario(text);

  LadderSystem sys = build_system(s);
  REQUIRE(sys.levels.size() == 3);
  CHECK(sys.levels[1].dephasing == Approx(constants::two_pi * 1.0e6));
  REQUIRE(sys.decays.size() == 1);
  CHECK(sys.decays[0].from == 1);
  CHECK(sys.decays[0].to == 0);
  CHECK(sys.decays[0].rate == Approx(constants::two_pi * 6.0666e6));
  REQUIRE(sys.drives.size() == 2);
  CHECK(sys.drives[0].role == DriveRole::Probe);
  CHECK(sys.drives[1].role == DriveRole::Coupler);
  CHECK(sys.drives[1].rabi == Approx(constants::two_pi * 5.0e6));

  std::vector<double> grid = build_detuning_grid(*s.scan);
  REQUIRE(grid.size() == 3);
  CHECK(grid.front() == Approx(-constants::two_pi * 6.0e7));
  CHECK(grid.back() == Approx(constants::two_pi * 6.0e7));

  VaporConfig still = build_vapor(s, species_by_name(s.species));
  CHECK(still.n_classes == 1);
}

TEST_CASE("drive envelopes come through the schema", "[cli]") {
  std::string text = kMinimal;
  text.replace(text.find("\"rabi_hz\": 5.0e6"), 16,
               "\"rabi_hz\": 5.0e6, \"envelope\": {\"rectangle\": "
               "{\"t_on_s\": 2.0e-6, \"t_off_s\": 7.0e-6}}");
  LadderSystem sys = build_system(parse_scenario(text));
  const Envelope& env = sys.drives[1].envelope;
  CHECK(env(1.0e-6) == 0.0);
  CHECK(env(3.0e-6) == 1.0);
  CHECK(env(8.0e-6) == 0.0);
}

TEST_CASE("species table file mirrors the built-in data", "[cli]") {
  Species file = parse_species_table(
      read_text_file(repo_path("data/species/rb87.json")));
  Species builtin = rb87();
  CHECK(file.name == builtin.name);
  CHECK(file.mass == Approx(builtin.mass).epsilon(1e-12));
  CHECK(file.ground_state == builtin.ground_state);
  CHECK(file.intermediate_state == builtin.intermediate_state);
  CHECK(file.probe_wavelength == builtin.probe_wavelength);
  CHECK(file.coupler_wavelength == builtin.coupler_wavelength);
  CHECK(file.intermediate_decay_rate ==
        Approx(builtin.intermediate_decay_rate).epsilon(1e-12));
  REQUIRE(file.quantum_defects.size() == builtin.quantum_defects.size());
  for (const auto& [series, qd] : builtin.quantum_defects) {
    REQUIRE(file.quantum_defects.count(series) == 1);
    CHECK(file.quantum_defects.at(series).delta0 == qd.delta0);
    CHECK(file.quantum_defects.at(series).delta2 == qd.delta2);
  }
  REQUIRE(file.dipoles.size() == 1);
  CHECK(file.dipoles[0].d_ea0 == 745.0);
  CHECK(file.dipoles[0].lower.n == builtin.dipoles[0].lower.n);
  CHECK(file.dipoles[0].lower.series == builtin.dipoles[0].lower.series);
  CHECK(file.dipoles[0].lower.energy ==
        Approx(builtin.dipoles[0].lower.energy).epsilon(1e-12));
  CHECK(file.dipoles[0].upper.n == builtin.dipoles[0].upper.n);
  CHECK(file.dipoles[0].upper.series == builtin.dipoles[0].upper.series);
  CHECK(file.dipoles[0].upper.energy ==
        Approx(builtin.dipoles[0].upper.energy).epsilon(1e-12));

  Species cs = parse_species_table(
      read_text_file(repo_path("data/species/cs133.json")));
  CHECK(cs.name == cs133().name);
  CHECK(cs.intermediate_decay_rate ==
        Approx(cs133().intermediate_decay_rate).epsilon(1e-12));
  CHECK(cs.dipoles.empty());
}

TEST_CASE("bundled scenarios parse and echo back stably", "[cli]") {
  for (const char* name :
       {"fig1c", "fig2a", "fig2b", "fig2c", "fig3"}) {
    INFO(name);
    std::string text =
        read_text_file(repo_path(std::string("scenarios/") + name + ".scenario"));
    Scenario s = parse_scenario(text);
    std::string first = serialize_scenario(s);
    CHECK(serialize_scenario(parse_scenario(first)) == first);
  }
}

TEST_CASE("CSV round-trips doubles exactly", "[cli]") {
  std::vector<double> xs = {0.1, -3.0e9, 1.0 / 3.0, 6.62606e-34};
  std::string csv = render_csv({"x"}, {xs});
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x");
  for (double expected : xs) {
    REQUIRE(std::getline(in, line));
    CHECK(std::stod(line) == expected);
  }
  CHECK_THROWS_AS(render_csv({"a", "b"}, {xs}), ConfigError);
  CHECK_THROWS_AS(render_csv({"a", "b"}, {xs, {1.0}}), ConfigError);
}

TEST_CASE("sample column reader skips banter and rejects junk", "[cli]") {
  std::vector<double> v = read_sample_column(
      "value\n# comment line\n\n 0.25\n-0.5\n1e-3\n");
  REQUIRE(v.size() == 3);
  CHECK(v[0] == 0.25);
  CHECK(v[1] == -0.5);
  CHECK(v[2] == 1e-3);
  CHECK_THROWS_AS(read_sample_column("header\nalso not a number\n"),
                  ConfigError);
  CHECK_THROWS_AS(read_sample_column("# only comments\n"), ConfigError);
}
