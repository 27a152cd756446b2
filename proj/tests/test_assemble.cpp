// Copyright 2026 The HierGen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <regex>

#include "doctest.h"
#include "hiergen/assemble.hpp"
#include "hiergen/error.hpp"
#include "hiergen/html.hpp"
#include "support/support.hpp"

using namespace hiergen;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

CoarseDomTree small_tree() {
  CoarseDomTree t{CoarseNode{"body", {0, 0, 400, 300}, {}}, 400, 300};
  t.root.children.push_back(CoarseNode{"header", {0, 0, 400, 50}, {}});
  CoarseNode main{"main", {0, 50, 400, 250}, {}};
  main.children.push_back(CoarseNode{"section", {0, 50, 200, 250}, {}});
  main.children.push_back(CoarseNode{"aside", {200, 50, 200, 250}, {}});
  t.root.children.push_back(main);
  return t;
}

std::vector<LeafFragment> small_fragments() {
  return {LeafFragment{{0}, false, "<h1>Site</h1>", ""},
          LeafFragment{{1, 0}, false, "<p>body text</p>", ""},
          LeafFragment{{1, 1}, false, "<ul><li>a<li>b</ul>", ""}};
}

std::vector<std::string> marker_order(const std::string& doc) {
  std::vector<std::string> out;
  const std::regex re("data-cn=\"([0-9.]*)\"");
  for (auto it = std::sregex_iterator(doc.begin(), doc.end(), re); it != std::sregex_iterator(); ++it) {
    out.push_back((*it)[1]);
  }
  return out;
}

std::vector<std::string> tree_order(const CoarseDomTree& t) {
  std::vector<std::string> out;
  visit_nodes(t.root, [&](const CoarseNode&, int, const NodePath& p) { out.push_back(path_to_string(p)); });
  return out;
}

void replace_once(std::string& s, const std::string& from, const std::string& to) {
  const auto p = s.find(from);
  REQUIRE(p != std::string::npos);
  s.replace(p, from.size(), to);
}

}  // namespace

TEST_CASE("single leaf document") {
  const CoarseDomTree t{CoarseNode{"body", {0, 0, 100, 40}, {}}, 100, 40};
  const auto doc = assemble(t, {LeafFragment{{}, false, "<p>hi</p>", ""}});
  CHECK(doc.find("<body data-cn=\"\" data-bb=\"0,0,100,40\"><p>hi</p></body>") != std::string::npos);
  CHECK(doc.find("<meta name=\"hiergen:page\" content=\"100,40\">") != std::string::npos);
  CHECK(extract_coarse(doc) == t);
}

TEST_CASE("failed leaf leaves one marker") {
  const auto t = small_tree();
  auto frags = small_fragments();
  frags[1] = LeafFragment::failure({1, 0}, "EndpointError: HTTP 500 -- gave up");
  const auto doc = assemble(t, frags);
  CHECK(count_failure_markers(doc) == 1);
  CHECK(doc.find("<!-- hiergen:leaf-failed 1.0 ") != std::string::npos);
  const auto parsed = html::parse_document(doc);
  std::vector<const html::Node*> comments;
  std::function<void(const html::Node&)> walk = [&](const html::Node& n) {
    if (n.kind == html::Node::Kind::kComment) comments.push_back(&n);
    for (const auto& c : n.children) walk(*c);
  };
  walk(*parsed);
  REQUIRE(comments.size() == 1);
  CHECK(comments[0]->parent->attr("data-cn"));
  CHECK(*comments[0]->parent->attr("data-cn") == "1.0");
  CHECK(extract_coarse(doc) == t);
}

TEST_CASE("fragment problems") {
  const auto t = small_tree();
  auto frags = small_fragments();
  frags.pop_back();
  CHECK(code_of([&] { assemble(t, frags); }) == ErrorCode::kMissingFragment);
  frags = small_fragments();
  frags.push_back(frags.front());
  CHECK(code_of([&] { assemble(t, frags); }) == ErrorCode::kDuplicateLeafPath);
}

TEST_CASE("fragments cannot escape their leaf") {
  const auto t = small_tree();
  auto frags = small_fragments();
  frags[0].html = "</header></body><div data-cn=\"9\" data-bb=\"0,0,1,1\">x";
  frags[1].html = "<p>unclosed <b>bold";
  const auto doc = assemble(t, frags);
  CHECK(extract_coarse(doc) == t);
  CHECK(validate_preservation(t, doc).preserved);
}

TEST_CASE("contentless leaves need no fragment") {
  CoarseDomTree t{CoarseNode{"body", {0, 0, 100, 100}, {}}, 100, 100};
  t.root.children.push_back(CoarseNode{"img", {0, 0, 100, 50}, {}});
  t.root.children.push_back(CoarseNode{"div", {0, 50, 100, 50}, {}});
  const auto doc = assemble(t, {LeafFragment{{1}, false, "x", ""}});
  CHECK(doc.find("<img data-cn=\"0\" data-bb=\"0,0,100,50\"><div") != std::string::npos);
  CHECK(extract_coarse(doc) == t);
}

TEST_CASE("extract inverts assemble on random trees") {
  std::mt19937 rng(21);
  for (int i = 0; i < 100; ++i) {
    const auto t = testing::random_tree(rng, 7, 60);
    const auto frags = testing::random_fragments(rng, t);
    const auto doc = assemble(t, frags);
    CHECK(extract_coarse(doc) == t);
    CHECK(marker_order(doc) == tree_order(t));
    CHECK(validate_preservation(t, doc).preserved);
    CHECK(validate_preservation(extract_coarse(doc), doc).preserved);
    int failed = 0;
    for (const auto& f : frags) failed += f.failed ? 1 : 0;
    CHECK(count_failure_markers(doc) == failed);
  }
}

TEST_CASE("corrupt markers") {
  const auto t = small_tree();
  auto doc = assemble(t, small_fragments());
  auto bad = doc;
  replace_once(bad, "data-bb=\"0,0,400,50\"", "data-bb=\"0,0,x,50\"");
  CHECK(code_of([&] { extract_coarse(bad); }) == ErrorCode::kMarkerCorruption);
  bad = doc;
  replace_once(bad, "data-bb=\"0,0,400,50\"", "data-bb=\"0,0,400\"");
  CHECK(code_of([&] { extract_coarse(bad); }) == ErrorCode::kMarkerCorruption);
  bad = doc;
  replace_once(bad, "data-bb=\"0,0,400,50\"", "data-bb=\"0,0,-4,50\"");
  CHECK(code_of([&] { extract_coarse(bad); }) == ErrorCode::kMarkerCorruption);
  bad = doc;
  replace_once(bad, " data-bb=\"0,0,400,50\"", "");
  CHECK(code_of([&] { extract_coarse(bad); }) == ErrorCode::kMarkerCorruption);
  CHECK(code_of([] { extract_coarse("<html><body><p>x</p></body></html>"); }) == ErrorCode::kMarkerCorruption);
}

TEST_CASE("preservation accepts restyling") {
  const auto t = small_tree();
  const auto doc = assemble(t, small_fragments());
  CHECK(validate_preservation(t, doc).preserved);
  auto styled = doc;
  replace_once(styled, "<style></style>", "<style>main{display:flex}</style>");
  replace_once(styled, "<header data-cn=\"0\"", "<header class=\"top\" style=\"background:#123\" data-cn=\"0\"");
  replace_once(styled, "<p>body text</p>", "<div class=\"x\"><p>changed text</p></div>");
  const auto r = validate_preservation(t, styled);
  CHECK(r.preserved);
  CHECK(r.missing.empty());
  CHECK(r.extra_marked.empty());
}

TEST_CASE("preservation rejects structural edits") {
  const auto t = small_tree();
  const auto doc = assemble(t, small_fragments());
  SUBCASE("deleted marked node") {
    auto edited = doc;
    const auto b = edited.find("<aside");
    const auto e = edited.find("</aside>") + 8;
    edited.erase(b, e - b);
    const auto r = validate_preservation(t, edited);
    CHECK_FALSE(r.preserved);
    CHECK(r.missing == std::vector<std::string>{"1.1"});
    CHECK(r.extra_marked.empty());
  }
  SUBCASE("swapped siblings") {
    const auto section_b = doc.find("<section");
    const auto aside_e = doc.find("</aside>") + 8;
    const auto section_e = doc.find("</section>") + 10;
    const std::string section = doc.substr(section_b, section_e - section_b);
    const std::string aside = doc.substr(section_e, aside_e - section_e);
    const std::string edited = doc.substr(0, section_b) + aside + section + doc.substr(aside_e);
    CHECK_FALSE(validate_preservation(t, edited).preserved);
  }
  SUBCASE("tag change") {
    auto edited = doc;
    replace_once(edited, "<aside", "<nav");
    replace_once(edited, "</aside>", "</nav>");
    const auto r = validate_preservation(t, edited);
    CHECK_FALSE(r.preserved);
    CHECK(r.missing == std::vector<std::string>{"1.1"});
    CHECK(r.extra_marked == std::vector<std::string>{"1.1"});
  }
  SUBCASE("new marked element") {
    auto edited = doc;
    replace_once(edited, "<p>body text</p>", "<div data-cn=\"1.0.0\" data-bb=\"0,0,1,1\"></div>");
    const auto r = validate_preservation(t, edited);
    CHECK_FALSE(r.preserved);
    CHECK(r.extra_marked == std::vector<std::string>{"1.0.0"});
  }
  SUBCASE("moved under another parent") {
    auto edited = doc;
    const auto b = edited.find("<aside");
    const auto e = edited.find("</aside>") + 8;
    const std::string aside = edited.substr(b, e - b);
    edited.erase(b, e - b);
    replace_once(edited, "</header>", aside + "</header>");
    const auto r = validate_preservation(t, edited);
    CHECK_FALSE(r.preserved);
    CHECK(r.missing == std::vector<std::string>{"1.1"});
  }
}
