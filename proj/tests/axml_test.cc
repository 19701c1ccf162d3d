/*
 * Copyright (C) 2026 The appgrease Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "appgrease/axml.h"

#include <gtest/gtest.h>

#include <random>

#include "support/fixtures.h"
#include "support/generators.h"

namespace appgrease {
namespace {

using fixture::Node;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

// Compares a parsed element tree with the node tree the fixture encoder was
// given.
void ExpectSameTree(const AxmlDocument& doc, const XmlNode& got, const Node& want,
                    const std::string& where = "/") {
  if (want.is_text) {
    ASSERT_EQ(got.kind, NodeKind::kText) << where;
    EXPECT_EQ(doc.String(got.text), want.text) << where;
    return;
  }
  ASSERT_EQ(got.kind, NodeKind::kElement) << where;
  ASSERT_EQ(doc.NameOf(got), want.name) << where;
  ASSERT_EQ(got.attributes.size(), want.attrs.size()) << where;
  for (size_t i = 0; i < want.attrs.size(); ++i) {
    const XmlAttribute& a = got.attributes[i];
    const fixture::Attr& w = want.attrs[i];
    EXPECT_EQ(doc.String(a.name), w.name) << where;
    EXPECT_EQ(a.ns == kNoIndex ? "" : doc.String(a.ns), w.android ? fixture::kAndroidNs : "")
        << where << w.name;
    EXPECT_EQ(static_cast<uint8_t>(a.value.type), w.type) << where << w.name;
    if (w.type == 0x03) {
      EXPECT_EQ(doc.String(a.value.data), w.str) << where << w.name;
    } else {
      EXPECT_EQ(a.value.data, w.data) << where << w.name;
    }
    uint32_t res = a.name < doc.resource_map.size() ? doc.resource_map[a.name] : 0;
    EXPECT_EQ(res, w.res_id) << where << w.name;
  }
  ASSERT_EQ(got.children.size(), want.children.size()) << where;
  for (size_t i = 0; i < want.children.size(); ++i) {
    ExpectSameTree(doc, got.children[i], want.children[i], where + want.name + "/");
  }
}

TEST(AxmlTest, ParsesFixtureManifest) {
  Node manifest = fixture::FixtureManifest();
  AxmlDocument doc = ParseAxml(fixture::EncodeAxml(manifest));
  EXPECT_EQ(doc.NameOf(doc.root), "manifest");
  ASSERT_EQ(doc.root.namespaces.size(), 1u);
  EXPECT_EQ(doc.String(doc.root.namespaces[0].uri), kAndroidNamespaceUri);
  ExpectSameTree(doc, doc.root, manifest);
  EXPECT_FALSE(doc.pool.utf8);
}

TEST(AxmlTest, ParsesUtf8Layout) {
  Node layout = fixture::FixtureLayout();
  AxmlDocument doc = ParseAxml(fixture::EncodeAxml(layout, true));
  EXPECT_TRUE(doc.pool.utf8);
  ExpectSameTree(doc, doc.root, layout);
}

TEST(AxmlTest, ParsesTextNodes) {
  Node config = fixture::PinnedNetworkConfig();
  AxmlDocument doc = ParseAxml(fixture::EncodeAxml(config, true));
  ExpectSameTree(doc, doc.root, config);
}

TEST(AxmlTest, RejectsPlainTextXml) {
  EXPECT_EQ(CodeOf([] { ParseAxml(AsBytes("<?xml version=\"1.0\"?><manifest/>")); }),
            ErrorCode::kMalformedAxml);
}

TEST(AxmlTest, RejectsTruncatedAndOutOfRange) {
  Bytes good = fixture::EncodeAxml(fixture::FixtureManifest());
  Bytes truncated(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(good.size() / 2));
  EXPECT_EQ(CodeOf([&] { ParseAxml(truncated); }), ErrorCode::kMalformedAxml);

  Node tiny;
  tiny.name = "root";
  Bytes bytes = fixture::EncodeAxml(tiny);
  // The start element's name index sits 20 bytes into the chunk.
  size_t start = bytes.size() - 24 - 36;
  ASSERT_EQ(LoadLe16(&bytes[start]), chunk::kXmlStartElement);
  StoreLe32(&bytes[start + 20], 999);
  EXPECT_EQ(CodeOf([&] { ParseAxml(bytes); }), ErrorCode::kMalformedAxml);
}

TEST(AxmlTest, HandBuiltDocumentRoundTrips) {
  AxmlDocument doc;
  doc.root.name = doc.InternString("a");
  NodeHandle b = doc.AppendElement(doc.RootHandle(), "b");
  doc.AppendElement(doc.RootHandle(), "c");
  doc.SetAttribute(b, kAndroidNamespaceUri, "name", AttributeValue::String("x"), 0x01010003);
  Bytes bytes = SerializeAxml(doc);
  EXPECT_EQ(ParseAxml(bytes), doc);
}

TEST(AxmlTest, SerializeStartsWithXmlChunkHeader) {
  Node single;
  single.name = "manifest";
  Bytes ours = SerializeAxml(ParseAxml(fixture::EncodeAxml(single)));
  Bytes reference = fixture::EncodeAxml(single);
  ASSERT_GE(ours.size(), 8u);
  EXPECT_EQ(LoadLe16(&ours[0]), 0x0003);
  EXPECT_EQ(LoadLe16(&ours[2]), 8);
  EXPECT_EQ(LoadLe32(&ours[4]), ours.size());
  EXPECT_EQ(Bytes(ours.begin(), ours.begin() + 4), Bytes(reference.begin(), reference.begin() + 4));
}

TEST(AxmlTest, DanglingIndexIsRejectedOnWrite) {
  AxmlDocument doc = ParseAxml(fixture::EncodeAxml(fixture::FixtureManifest()));
  doc.root.attributes[0].name = 5000;
  EXPECT_EQ(CodeOf([&] { SerializeAxml(doc); }), ErrorCode::kMalformedAxml);
}

TEST(AxmlTest, FixtureManifestRoundTrips) {
  AxmlDocument doc = ParseAxml(fixture::EncodeAxml(fixture::FixtureManifest()));
  EXPECT_EQ(ParseAxml(SerializeAxml(doc)), doc);
}

TEST(AxmlTest, UnmodifiedSerializationIsByteIdentical) {
  for (bool utf8 : {false, true}) {
    Bytes bytes = fixture::EncodeAxml(fixture::FixtureManifest(), utf8);
    EXPECT_EQ(SerializeAxml(ParseAxml(bytes)), bytes) << "utf8=" << utf8;
  }
}

TEST(AxmlTest, FindElements) {
  AxmlDocument manifest = ParseAxml(fixture::EncodeAxml(fixture::FixtureManifest()));
  auto roots = manifest.FindElements(ElementSelector::Parse("manifest"));
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_TRUE(roots[0].path.empty());
  EXPECT_TRUE(manifest.FindElements(ElementSelector::Parse("receiver")).empty());
  EXPECT_EQ(manifest.FindElements(ElementSelector::Parse("/manifest/uses-permission")).size(), 3u);
  EXPECT_EQ(manifest.FindElements(ElementSelector::Parse("application/activity")).size(), 1u);
  EXPECT_TRUE(manifest.FindElements(ElementSelector::Parse("/application")).empty());

  AxmlDocument layout = ParseAxml(fixture::EncodeAxml(fixture::FixtureLayout(), true));
  auto hits = layout.FindElements(ElementSelector::Parse("LinearLayout[id=stories_bar]"));
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].path, std::vector<size_t>{0});
  const XmlNode& bar = layout.Resolve(hits[0]);
  EXPECT_EQ(bar.children.size(), 1u);
  EXPECT_EQ(layout.FindElements(ElementSelector::Parse("*")).size(), 4u);
}

TEST(AxmlTest, SelectorSyntax) {
  ElementSelector s = ElementSelector::Parse("/manifest/application[enabled=true][name=x]");
  EXPECT_TRUE(s.anchored);
  ASSERT_EQ(s.steps.size(), 2u);
  EXPECT_EQ(s.steps[1].predicates.size(), 2u);
  EXPECT_EQ(ElementSelector::Parse(s.ToString()).ToString(), s.ToString());
  for (const char* bad : {"", "a[", "a[b]", "a//b", "a[=x]", "a b"}) {
    EXPECT_EQ(CodeOf([&] { ElementSelector::Parse(bad); }), ErrorCode::kSelectorParseError) << bad;
  }
}

TEST(AxmlTest, RemoveElement) {
  AxmlDocument doc = ParseAxml(fixture::EncodeAxml(fixture::FixtureLayout(), true));
  auto sel = ElementSelector::Parse("LinearLayout[id=stories_bar]");
  auto hits = doc.FindElements(sel);
  ASSERT_EQ(hits.size(), 1u);
  doc.RemoveElement(hits[0]);
  EXPECT_TRUE(doc.FindElements(sel).empty());
  EXPECT_EQ(CodeOf([&] { doc.Resolve(hits[0]); }), ErrorCode::kStaleHandle);
  EXPECT_EQ(CodeOf([&] { doc.RemoveElement(doc.RootHandle()); }), ErrorCode::kCannotRemoveRoot);

  AxmlDocument reread = ParseAxml(SerializeAxml(doc));
  EXPECT_TRUE(reread.FindElements(sel).empty());
  EXPECT_TRUE(reread.FindElements(ElementSelector::Parse("TextView")).empty());
  EXPECT_EQ(reread.FindElements(ElementSelector::Parse("ListView[id=news_feed]")).size(), 1u);
}

TEST(AxmlTest, SetAttribute) {
  AxmlDocument doc = ParseAxml(fixture::EncodeAxml(fixture::FixtureManifest()));
  NodeHandle app = doc.FindElements(ElementSelector::Parse("application"))[0];
  doc.SetAttribute(app, kAndroidNamespaceUri, "networkSecurityConfig",
                   AttributeValue::Typed(TypedValue::Reference(0x7f100000)), 0x01010527);
  AxmlDocument reread = ParseAxml(SerializeAxml(doc));
  const XmlNode& node = reread.Resolve(reread.FindElements(ElementSelector::Parse("application"))[0]);
  const XmlAttribute* a = reread.FindAttribute(node, kAndroidNamespaceUri, "networkSecurityConfig");
  ASSERT_NE(a, nullptr);
  EXPECT_EQ(a->value, TypedValue::Reference(0x7f100000));
  EXPECT_EQ(reread.resource_map.at(a->name), 0x01010527u);

  // Resource-id attributes stay sorted by id.
  uint32_t last = 0;
  for (const XmlAttribute& x : node.attributes) {
    uint32_t id = x.name < reread.resource_map.size() ? reread.resource_map[x.name] : 0;
    if (id == 0) break;
    EXPECT_LT(last, id);
    last = id;
  }
}

TEST(AxmlTest, SetAttributeTwiceLastWins) {
  AxmlDocument doc = ParseAxml(fixture::EncodeAxml(fixture::FixtureManifest()));
  NodeHandle app = doc.FindElements(ElementSelector::Parse("application"))[0];
  doc.SetAttribute(app, "", "flag", AttributeValue::Typed(TypedValue::Boolean(true)));
  doc.SetAttribute(app, "", "flag", AttributeValue::Typed(TypedValue::Boolean(false)));
  const XmlNode& node = doc.Resolve(app);
  int count = 0;
  for (const XmlAttribute& a : node.attributes) count += doc.String(a.name) == "flag";
  EXPECT_EQ(count, 1);
  EXPECT_EQ(doc.FindAttribute(node, "", "flag")->value, TypedValue::Boolean(false));
  doc.SetAttribute(app, "", "flag", AttributeValue::Typed(TypedValue::Boolean(true)));
  EXPECT_EQ(doc.FindAttribute(doc.Resolve(app), "", "flag")->value, (TypedValue{ValueType::kBoolean, 1}));
}

TEST(AxmlTest, StaleHandleOnSetAttribute) {
  AxmlDocument doc = ParseAxml(fixture::EncodeAxml(fixture::FixtureLayout(), true));
  NodeHandle feed = doc.FindElements(ElementSelector::Parse("ListView"))[0];
  doc.RemoveElement(doc.FindElements(ElementSelector::Parse("TextView"))[0]);
  EXPECT_EQ(CodeOf([&] {
              doc.SetAttribute(feed, "", "x", AttributeValue::String("y"));
            }),
            ErrorCode::kStaleHandle);
}

TEST(AxmlTest, InternString) {
  AxmlDocument doc = ParseAxml(fixture::EncodeAxml(fixture::FixtureManifest()));
  uint32_t existing = *doc.FindString("manifest");
  size_t before = doc.pool.size();
  EXPECT_EQ(doc.InternString("manifest"), existing);
  uint32_t fresh = doc.InternString("brand-new");
  EXPECT_EQ(fresh, before);
  EXPECT_EQ(doc.InternString("brand-new"), fresh);
}

TEST(AxmlTest, UnknownChunksArePreserved) {
  Node root;
  root.name = "r";
  root.children.push_back(Node{"c", {}, {}, false, {}});
  Bytes bytes = fixture::EncodeAxml(root);
  // Splice an unknown 12-byte chunk after the root's start element.
  Bytes blob = {0x77, 0x02, 0x08, 0x00, 0x0c, 0x00, 0x00, 0x00, 0xde, 0xad, 0xbe, 0xef};
  size_t end_of_pool = 8 + LoadLe32(&bytes[12]);
  size_t root_start = end_of_pool;
  size_t insert_at = root_start + LoadLe32(&bytes[root_start + 4]);
  bytes.insert(bytes.begin() + static_cast<std::ptrdiff_t>(insert_at), blob.begin(), blob.end());
  StoreLe32(&bytes[4], static_cast<uint32_t>(bytes.size()));
  AxmlDocument doc = ParseAxml(bytes);
  ASSERT_EQ(doc.root.children.size(), 2u);
  EXPECT_EQ(doc.root.children[0].kind, NodeKind::kOpaque);
  EXPECT_EQ(SerializeAxml(doc), bytes);
}

TEST(AxmlTest, Utf16Conversion) {
  std::string s = "caf\xc3\xa9 \xe2\x82\xac \xf0\x9f\x98\x80";
  std::u16string u = Utf8ToUtf16(s);
  EXPECT_EQ(u.size(), 9u);
  EXPECT_EQ(Utf16ToUtf8(u), s);
}

// ---- property suites --------------------------------------------------------

// Round trip over 300 generated trees in both pool encodings.
TEST(AxmlProperty, RoundTrip) {
  std::mt19937_64 rng(4242);
  for (int c = 0; c < 300; ++c) {
    Node tree = fixture::RandomNode(rng, 0);
    Bytes bytes = fixture::EncodeAxml(tree, c % 2 == 0);
    AxmlDocument doc = ParseAxml(bytes);
    ExpectSameTree(doc, doc.root, tree);
    if (HasFatalFailure()) FAIL() << "case " << c;
    Bytes again = SerializeAxml(doc);
    ASSERT_EQ(ParseAxml(again), doc) << "case " << c;
    ASSERT_EQ(again, bytes) << "case " << c;
  }
}

std::vector<NodeHandle> AllElements(const AxmlDocument& doc) {
  return doc.FindElements(ElementSelector::Parse("*"));
}

// Edits leave the pool prefix alone and touch only the target; 250 cases.
TEST(AxmlProperty, EditLocalityAndAppendOnlyPool) {
  std::mt19937_64 rng(777);
  for (int c = 0; c < 250; ++c) {
    Node tree = fixture::RandomNode(rng, 0);
    tree.children.push_back(fixture::RandomNode(rng, 1));
    AxmlDocument doc = ParseAxml(fixture::EncodeAxml(tree, c % 2 == 1));
    const std::vector<std::string> prefix = doc.pool.strings;
    AxmlDocument edited = doc;
    std::vector<NodeHandle> all = AllElements(edited);
    ASSERT_GE(all.size(), 2u);
    NodeHandle target = all[1 + rng() % (all.size() - 1)];
    bool remove = rng() % 2 == 0;
    if (remove) {
      edited.RemoveElement(target);
    } else {
      edited.SetAttribute(target, kAndroidNamespaceUri, "value",
                          AttributeValue::String(fixture::RandomString(rng) + "!"), 0x01010024);
    }
    AxmlDocument reread = ParseAxml(SerializeAxml(edited));
    ASSERT_GE(reread.pool.size(), prefix.size());
    for (size_t i = 0; i < prefix.size(); ++i) ASSERT_EQ(reread.pool.strings[i], prefix[i]);

    // Compare every untouched element by path.
    for (const NodeHandle& h : AllElements(doc)) {
      const std::vector<size_t>& p = h.path;
      bool under = p.size() >= target.path.size() &&
                   std::equal(target.path.begin(), target.path.end(), p.begin());
      if (under) continue;
      std::vector<size_t> mapped = p;
      if (remove) {
        // Siblings after the removed node shift left by one.
        size_t d = target.path.size() - 1;
        bool same_parent = mapped.size() > d &&
                           std::equal(target.path.begin(), target.path.begin() + d, mapped.begin());
        if (same_parent && mapped[d] > target.path[d]) --mapped[d];
      }
      const XmlNode& before = doc.Resolve(h);
      const XmlNode& after = reread.Resolve(NodeHandle{mapped, reread.generation()});
      ASSERT_EQ(doc.NameOf(before), reread.NameOf(after)) << "case " << c;
      ASSERT_EQ(before.attributes.size(), after.attributes.size()) << "case " << c;
      for (size_t i = 0; i < before.attributes.size(); ++i) {
        ASSERT_EQ(before.attributes[i], after.attributes[i]) << "case " << c;
      }
    }
  }
}

}  // namespace
}  // namespace appgrease
