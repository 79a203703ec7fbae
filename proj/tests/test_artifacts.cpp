#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "cobexplain/artifacts.hpp"
#include "cobexplain/errors.hpp"
#include "cobexplain/program.hpp"

using namespace cobexplain;

namespace {

std::string fixed(std::initializer_list<const char*> lines) {
  std::string out;
  for (const char* line : lines) {
    out += line;
    out += '\n';
  }
  return out;
}

cobol::Program demo_program() {
  return cobol::parse_program(cobol::read_source_text(
      fixed({
          "000100* DEMO - SHOWS ARTIFACT EXTRACTION.",
          "000200* SECOND HEADER LINE.",
          "000300 IDENTIFICATION DIVISION.",
          "000400 PROGRAM-ID. DEMO.",
          "000500 DATA DIVISION.",
          "000600 WORKING-STORAGE SECTION.",
          "000700 01 WS-TOTAL      PIC 9(5) VALUE 0.",
          "000800 01 WS-UNUSED     PIC X(3).",
          "000900 01 WS-FLAG       PIC X VALUE 'N'.",
          "001000 PROCEDURE DIVISION.",
          "001100* RUNS THE WHOLE JOB.",
          "001200 MAIN-PARA.",
          "001300     PERFORM STEP-A THRU STEP-B",
          "001400     PERFORM MISSING-PARA",
          "001500     STOP RUN.",
          "001600 STEP-A.",
          "001700     ADD 1 TO WS-TOTAL.",
          "001800* FLIPS THE DONE FLAG.",
          "001900 STEP-B.",
          "002000     MOVE 'Y' TO WS-FLAG.",
      }),
      "demo.cbl", cobol::FormatHint::Fixed));
}

}  // namespace

TEST_CASE("function units list paragraphs and sections sorted") {
  auto program = demo_program();
  auto units = artifacts::function_units(program);
  CHECK(units == std::vector<std::string>{"MAIN-PARA", "STEP-A", "STEP-B"});
}

TEST_CASE("function artifacts carry source, variables, and expanded callees") {
  auto program = demo_program();
  auto fn = artifacts::function_artifacts(program, "MAIN-PARA");
  CHECK(fn.function_name == "MAIN-PARA");
  CHECK(fn.source.find("PERFORM STEP-A THRU STEP-B") != std::string::npos);
  CHECK(fn.called_functions == std::vector<std::string>{"STEP-A", "STEP-B"});
  CHECK(fn.unresolved == std::vector<std::string>{"MISSING-PARA"});
  CHECK(fn.variables.empty());

  auto leaf = artifacts::function_artifacts(program, "STEP-A");
  CHECK(leaf.called_functions.empty());
  REQUIRE(leaf.variables.size() == 1);
  CHECK(leaf.variables[0].first == "WS-TOTAL");
  CHECK(leaf.variables[0].second == "9(5)");
}

TEST_CASE("unknown function name raises not-found") {
  auto program = demo_program();
  CHECK_THROWS_AS(artifacts::function_artifacts(program, "NOPE"), NotFoundError);
}

TEST_CASE("section artifacts include member paragraphs as callees") {
  auto program = cobol::parse_program(cobol::read_source_text(
      fixed({
          "000100 IDENTIFICATION DIVISION.",
          "000200 PROGRAM-ID. SECDEMO.",
          "000300 PROCEDURE DIVISION.",
          "000400 MAIN-SECTION SECTION.",
          "000500     PERFORM OUTSIDE-PARA.",
          "000600 FIRST-MEMBER.",
          "000700     MOVE 1 TO WS-A.",
          "000800 SECOND-MEMBER.",
          "000900     MOVE 2 TO WS-A.",
          "001000 TAIL-SECTION SECTION.",
          "001100 OUTSIDE-PARA.",
          "001200     MOVE 3 TO WS-A.",
      }),
      "sec.cbl", cobol::FormatHint::Fixed));
  auto fn = artifacts::function_artifacts(program, "MAIN-SECTION");
  CHECK(fn.called_functions ==
        std::vector<std::string>{"OUTSIDE-PARA", "FIRST-MEMBER", "SECOND-MEMBER"});
}

TEST_CASE("file artifacts cover the procedure division") {
  auto program = demo_program();
  auto file = artifacts::file_artifacts(program, "demo.cbl");
  CHECK(file.file_name == "demo.cbl");
  CHECK(file.program_id == "DEMO");
  CHECK(file.source.find("PROCEDURE DIVISION") != std::string::npos);
  CHECK(file.source.find("IDENTIFICATION") == std::string::npos);
  CHECK(file.variables.size() == 3);
  std::vector<std::pair<std::string, std::string>> expected = {
      {"MAIN-PARA", "STEP-A"},
      {"MAIN-PARA", "STEP-B"},
  };
  CHECK(file.function_dependencies == expected);
}

TEST_CASE("function references come from leading comment blocks") {
  auto program = demo_program();
  auto refs = artifacts::extract_function_references(program);
  REQUIRE(refs.size() == 2);
  CHECK(refs[0].unit_id == "MAIN-PARA");
  CHECK(refs[0].reference_text == "RUNS THE WHOLE JOB.");
  CHECK(refs[0].level == pipeline::Level::Function);
  CHECK(refs[0].origin.find("demo.cbl:11-11") != std::string::npos);
  CHECK(refs[1].unit_id == "STEP-B");
}

TEST_CASE("file reference strips boilerplate header lines") {
  auto program = cobol::parse_program(cobol::read_source_text(
      fixed({
          "000100* REPORTS MONTHLY TOTALS PER REGION.",
          "000200* AUTHOR: J SMITH",
          "000300* COPYRIGHT (C) 1987 ACME CORP. ALL RIGHTS RESERVED.",
          "000400* DATE: 03/12/87   VERSION: 4",
          "000500* USES THE REGION TABLE AS INPUT.",
          "000600 IDENTIFICATION DIVISION.",
          "000700 PROGRAM-ID. RPT.",
          "000800 PROCEDURE DIVISION.",
          "000900 MAIN-PARA.",
          "001000     STOP RUN.",
      }),
      "rpt.cbl", cobol::FormatHint::Fixed));
  auto ref = artifacts::extract_file_reference(program);
  REQUIRE(ref.has_value());
  CHECK(ref->level == pipeline::Level::File);
  CHECK(ref->unit_id == "rpt.cbl");
  CHECK(ref->reference_text ==
        "REPORTS MONTHLY TOTALS PER REGION. USES THE REGION TABLE AS INPUT.");
}

TEST_CASE("file reference is absent without a header comment") {
  auto program = cobol::parse_program(cobol::read_source_text(
      fixed({
          "000100 IDENTIFICATION DIVISION.",
          "000200 PROGRAM-ID. BARE.",
          "000300 PROCEDURE DIVISION.",
          "000400 MAIN-PARA.",
          "000500     STOP RUN.",
      }),
      "bare.cbl", cobol::FormatHint::Fixed));
  CHECK(!artifacts::extract_file_reference(program).has_value());
}

TEST_CASE("project reference drops code fences and setup sections") {
  std::string readme =
      "# payroll\n"
      "\n"
      "Computes monthly pay for every region.\n"
      "\n"
      "## Installation\n"
      "\n"
      "Run make install.\n"
      "\n"
      "## Design\n"
      "\n"
      "Batch first, reports second.\n"
      "\n"
      "```\n"
      "make test\n"
      "```\n";
  auto ref = artifacts::extract_project_reference(readme, "payroll", "README.md");
  REQUIRE(ref.has_value());
  CHECK(ref->level == pipeline::Level::Project);
  CHECK(ref->unit_id == "payroll");
  CHECK(ref->reference_text.find("Computes monthly pay") != std::string::npos);
  CHECK(ref->reference_text.find("Batch first") != std::string::npos);
  CHECK(ref->reference_text.find("make install") == std::string::npos);
  CHECK(ref->reference_text.find("make test") == std::string::npos);
}

TEST_CASE("empty readme yields no project reference") {
  CHECK(!artifacts::extract_project_reference("", "p", "README.md").has_value());
}

TEST_CASE("normalize whitespace collapses runs and trims") {
  CHECK(artifacts::normalize_whitespace("  a\n\n  b\tc  ") == "a b c");
  CHECK(artifacts::normalize_whitespace("") == "");
  CHECK(artifacts::normalize_whitespace(" \n\t ") == "");
}

TEST_CASE("corpus filter fixtures sit exactly on the boundary") {
  auto one = artifacts::corpus_filter(FIXTURES_DIR "/filter/one-file");
  CHECK(!one.accepted);
  CHECK(one.cobol_files == 1);
  REQUIRE(one.reasons.size() == 1);
  CHECK(one.reasons[0] == "fewer than two COBOL source files");

  auto at80 = artifacts::corpus_filter(FIXTURES_DIR "/filter/boundary-80");
  CHECK(at80.accepted);
  CHECK(at80.cobol_line_pct == doctest::Approx(80.0).epsilon(1e-12));

  auto below = artifacts::corpus_filter(FIXTURES_DIR "/filter/boundary-799");
  CHECK(!below.accepted);
  CHECK(below.cobol_line_pct == doctest::Approx(79.9).epsilon(1e-12));
}

TEST_CASE("corpus filter accepts the bundled projects") {
  CHECK(artifacts::corpus_filter(FIXTURES_DIR "/proj-a").accepted);
  CHECK(artifacts::corpus_filter(FIXTURES_DIR "/proj-b").accepted);
  CHECK(artifacts::corpus_filter(FIXTURES_DIR "/proj-c").accepted);
}

TEST_CASE("corpus filter rejects a missing directory") {
  CHECK_THROWS_AS(artifacts::corpus_filter(FIXTURES_DIR "/no-such-dir"), IoError);
}
