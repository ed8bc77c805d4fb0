#include <gtest/gtest.h>

#include <sstream>

#include "framespan/corpus.hpp"
#include "framespan/segmentation.hpp"

using namespace framespan;

namespace {

std::vector<AnnotatedSentence> load_str(const std::string& text,
                                        std::vector<std::string>* warnings = nullptr) {
  std::istringstream in(text);
  return load_corpus_stream(in, warnings);
}

const char* kTwoFrameSentence =
    R"({"tokens":["he","sold","the","car","cheap"],"pos":["P","V","D","N","A"],)"
    R"("annotations":[{"target":[1,1],"lu":"sell.v","frame":"Sale",)"
    R"("elements":[{"role":"Seller","span":[0,0]},{"role":"Goods","span":[2,3]}]},)"
    R"({"target":[4,4],"lu":"cheap.a","frame":"Price","elements":[]}]})";

FrameOntology tiny_ontology() {
  ordered_json j = ordered_json::parse(R"({
    "frames": {"Sale": ["Seller", "Goods", "Buyer"], "Price": ["Goods"]},
    "lexicon": {"sell.v": ["Sale"], "cheap.a": ["Price", "Sale"]}
  })");
  return ontology_from_json(j);
}

}  // namespace

TEST(Segmentation, ValidateAcceptsTilings) {
  Segmentation s{{{0, 1, 0}, {2, 2, 3}, {3, 5, 0}}};
  EXPECT_NO_THROW(s.validate(6, 3));
  EXPECT_THROW(s.validate(6, 2), error);  // length cap
  EXPECT_THROW(s.validate(7, 3), error);  // does not reach the end
  Segmentation gap{{{0, 1, 0}, {3, 5, 0}}};
  EXPECT_THROW(gap.validate(6, 3), error);
  Segmentation overlap{{{0, 2, 0}, {2, 5, 0}}};
  EXPECT_THROW(overlap.validate(6, 4), error);
  EXPECT_THROW(Segmentation{}.validate(1, 1), error);
}

TEST(Segmentation, NonnullExtraction) {
  Segmentation s{{{0, 1, 0}, {2, 2, 2}, {3, 3, 0}, {4, 5, 1}}};
  auto nn = s.nonnull();
  ASSERT_EQ(nn.size(), 2u);
  EXPECT_EQ(nn[0], (Segment{2, 2, 2}));
  EXPECT_EQ(nn[1], (Segment{4, 5, 1}));
}

TEST(Segmentation, CanonicalTilingChunksGaps) {
  Segmentation t = canonical_tiling({{2, 3, 1}}, 8, 2);
  Segmentation want{{{0, 1, 0}, {2, 3, 1}, {4, 5, 0}, {6, 7, 0}}};
  EXPECT_EQ(t, want);

  Segmentation unit = canonical_tiling({}, 3, 1);
  EXPECT_EQ(unit, (Segmentation{{{0, 0, 0}, {1, 1, 0}, {2, 2, 0}}}));

  // uneven tail chunk
  Segmentation tail = canonical_tiling({{0, 0, 2}}, 4, 2);
  EXPECT_EQ(tail, (Segmentation{{{0, 0, 2}, {1, 2, 0}, {3, 3, 0}}}));

  EXPECT_THROW(canonical_tiling({{0, 2, 1}, {2, 3, 2}}, 5, 3), error);
}

TEST(Corpus, LoadAndRoundTrip) {
  auto sents = load_str(std::string(kTwoFrameSentence) + "\n");
  ASSERT_EQ(sents.size(), 1u);
  const AnnotatedSentence& s = sents[0];
  EXPECT_EQ(s.tokens.size(), 5u);
  ASSERT_EQ(s.annotations.size(), 2u);
  EXPECT_EQ(s.annotations[0].frame, "Sale");
  EXPECT_EQ(s.annotations[0].elements[1].role, "Goods");
  EXPECT_EQ(s.annotations[1].elements.size(), 0u);

  auto again = load_str(serialize_corpus(sents));
  EXPECT_EQ(again, sents);
}

TEST(Corpus, EmptyFileAndBlankLines) {
  EXPECT_TRUE(load_str("").empty());
  EXPECT_TRUE(load_str("\n  \n").empty());
}

TEST(Corpus, MalformedLineNamesLineNumber) {
  try {
    load_str(std::string(kTwoFrameSentence) + "\n{not json\n");
    FAIL() << "expected data_error";
  } catch (const data_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Corpus, StructuralValidation) {
  EXPECT_THROW(load_str(R"({"tokens":[],"pos":[]})"), data_error);
  EXPECT_THROW(load_str(R"({"tokens":["a","b"],"pos":["X"]})"), data_error);
  EXPECT_THROW(
      load_str(
          R"({"tokens":["a"],"pos":["X"],"annotations":[{"target":[0,1],"lu":"l","frame":"F","elements":[]}]})"),
      data_error);
  try {
    load_str(
        R"({"tokens":["a","b"],"pos":["X","X"],"annotations":[{"target":[0,0],"lu":"l","frame":"F",)"
        R"("elements":[{"role":"R","span":[1,2]}]}]})");
    FAIL() << "expected data_error";
  } catch (const data_error& e) {
    EXPECT_NE(std::string(e.what()).find("R"), std::string::npos);
  }
}

TEST(Corpus, OverlappingRolesRejected) {
  try {
    load_str(
        R"({"tokens":["a","b","c"],"pos":["X","X","X"],"annotations":[{"target":[0,0],"lu":"l","frame":"F",)"
        R"("elements":[{"role":"A","span":[0,1]},{"role":"B","span":[1,2]}]}]})");
    FAIL() << "expected data_error";
  } catch (const data_error& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("A"), std::string::npos);
    EXPECT_NE(msg.find("overlap"), std::string::npos);
  }
}

TEST(Corpus, DuplicateTargetKeepsFirst) {
  std::vector<std::string> warnings;
  auto sents = load_str(
      R"({"tokens":["a","b"],"pos":["X","X"],"annotations":[)"
      R"({"target":[0,0],"lu":"l1","frame":"F1","elements":[]},)"
      R"({"target":[0,0],"lu":"l2","frame":"F2","elements":[]}]})"
      "\n",
      &warnings);
  ASSERT_EQ(sents[0].annotations.size(), 1u);
  EXPECT_EQ(sents[0].annotations[0].frame, "F1");
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("duplicate annotation"), std::string::npos);
}

TEST(Corpus, DiscontinuousArgumentDropped) {
  std::vector<std::string> warnings;
  auto sents = load_str(
      R"({"tokens":["a","b","c","d"],"pos":["X","X","X","X"],"annotations":[{"target":[0,0],"lu":"l","frame":"F",)"
      R"("elements":[{"role":"A","span":[1,1]},{"role":"B","span":[2,2]},{"role":"A","span":[3,3]}]}]})"
      "\n",
      &warnings);
  const auto& elems = sents[0].annotations[0].elements;
  ASSERT_EQ(elems.size(), 1u);
  EXPECT_EQ(elems[0].role, "B");
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("discontinuous"), std::string::npos);
}

TEST(Ontology, OrderPreservedAndResolvable) {
  FrameOntology o = tiny_ontology();
  EXPECT_EQ(o.frame_id("Sale"), 0);
  EXPECT_EQ(o.frame_id("Price"), 1);
  EXPECT_EQ(o.frame_id("Missing"), -1);
  EXPECT_EQ(o.num_labels(0), 4);  // null + 3 roles
  EXPECT_EQ(o.num_labels(1), 2);
  EXPECT_EQ(o.label_of_role(0, "Goods"), 2);
  EXPECT_EQ(o.label_of_role(0, "Nope"), -1);

  // "Goods" appears in both frames and shares one role row
  EXPECT_EQ(o.role_row(0, 2), o.role_row(1, 1));
  EXPECT_EQ(o.role_row(0, kNullLabel), 0);
  ASSERT_EQ(o.role_names.size(), 4u);  // null, Seller, Goods, Buyer
  EXPECT_EQ(o.role_names[0], "<null>");

  EXPECT_EQ(o.lu_id("cheap.a"), 1);
  EXPECT_EQ(o.lu_frames[1], (std::vector<int>{1, 0}));  // candidate order from file

  // identical content hashes identically; different content differs
  EXPECT_EQ(o.hash(), tiny_ontology().hash());
  ordered_json j2 = ordered_json::parse(R"({"frames":{"Sale":["Seller"]},"lexicon":{}})");
  EXPECT_NE(o.hash(), ontology_from_json(j2).hash());
}

TEST(Ontology, Validation) {
  EXPECT_THROW(ontology_from_json(ordered_json::parse(R"({"lexicon":{}})")), data_error);
  EXPECT_THROW(
      ontology_from_json(ordered_json::parse(R"({"frames":{"F":["A","A"]},"lexicon":{}})")),
      data_error);
  EXPECT_THROW(
      ontology_from_json(ordered_json::parse(R"({"frames":{"F":[]},"lexicon":{"l":["G"]}})")),
      data_error);
  EXPECT_THROW(
      ontology_from_json(ordered_json::parse(R"({"frames":{"F":[]},"lexicon":{"l":[]}})")),
      data_error);
}

TEST(Vocabulary, IdsAndFrequencies) {
  auto sents = load_str(std::string(kTwoFrameSentence) + "\n");
  Vocabulary v = build_vocabulary(sents);
  EXPECT_EQ(v.word_id("<unk>"), 0);
  int he = v.word_id("he");
  EXPECT_GT(he, 0);
  EXPECT_EQ(v.freq[he], 1);
  EXPECT_EQ(v.word_id("never-seen"), Vocabulary::kUnkWord);
  EXPECT_EQ(v.pos_id("V"), v.pos_id("V"));
  EXPECT_EQ(v.pos_id("ZZ"), Vocabulary::kUnkPos);

  Vocabulary v2;
  v2.add_word("a");
  v2.add_word("a");
  EXPECT_EQ(v2.freq[v2.word_id("a")], 2);
}

TEST(Vocabulary, UnkPolicy) {
  Vocabulary v;
  v.add_word("rare");
  v.add_word("common");
  v.add_word("common");

  Rng rng(3);
  // frequency > 1: never replaced even at p = 1
  for (int k = 0; k < 100; ++k) EXPECT_EQ(train_word_id(v, "common", 1.0, rng), v.word_id("common"));
  // frequency 1 at p = 1: always replaced
  for (int k = 0; k < 100; ++k) EXPECT_EQ(train_word_id(v, "rare", 1.0, rng), Vocabulary::kUnkWord);

  // statistical check at p = 0.1
  Rng rng2(19);
  int unks = 0;
  const int trials = 100000;
  for (int k = 0; k < trials; ++k)
    unks += train_word_id(v, "rare", 0.1, rng2) == Vocabulary::kUnkWord ? 1 : 0;
  EXPECT_NEAR(unks / static_cast<double>(trials), 0.1, 0.01);

  auto ids = apply_unk_policy(v, {"common", "absent"}, 0.1, rng2);
  EXPECT_EQ(ids[0], v.word_id("common"));
  EXPECT_EQ(ids[1], Vocabulary::kUnkWord);
}

TEST(Pretrained, LoadLookupAndPolicies) {
  std::istringstream in("dog 0.1 0.2 0.3\ncat -1 0 1\ndog 9 9 9\n");
  std::vector<std::string> warnings;
  PretrainedTable t = load_pretrained_stream(in, &warnings);
  EXPECT_EQ(t.dim, 3);
  EXPECT_EQ(t.table.rows(), 3);  // zero row + 2 words
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("duplicate word dog"), std::string::npos);

  int dog = t.row_of("dog");
  EXPECT_EQ(t.table.at(dog, 1), 0.2);  // first occurrence wins
  EXPECT_EQ(t.row_of("absent"), 0);
  for (int c = 0; c < t.dim; ++c) EXPECT_EQ(t.table.at(0, c), 0.0);

  std::istringstream bad("a 1 2\nb 1 2 3\n");
  EXPECT_THROW(load_pretrained_stream(bad), data_error);
  std::istringstream nonnum("a 1 x\n");
  EXPECT_THROW(load_pretrained_stream(nonnum), data_error);
}

TEST(Trees, HandParsedSpans) {
  ScaffoldInstance t = parse_bracketed_tree("(S (NP a b) (VP c))", 20);
  EXPECT_EQ(t.tokens, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(t.pos, (std::vector<std::string>{"NP", "NP", "VP"}));
  EXPECT_EQ(t.positive_spans,
            (std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {2, 2}}));
  EXPECT_EQ(t.source, ScaffoldInstance::Source::treebank);

  EXPECT_EQ(parse_bracketed_tree("(X a)", 20).positive_spans,
            (std::vector<std::pair<int, int>>{{0, 0}}));
  // unary chain counts once
  EXPECT_EQ(parse_bracketed_tree("(S (A (B a)))", 20).positive_spans,
            (std::vector<std::pair<int, int>>{{0, 0}}));
  // length cap filters the wide spans
  EXPECT_EQ(parse_bracketed_tree("(S (NP a b) (VP c))", 2).positive_spans,
            (std::vector<std::pair<int, int>>{{0, 1}, {2, 2}}));
}

TEST(Trees, ParseErrorsCarryOffsets) {
  try {
    parse_bracketed_tree("(S (NP a b)", 20);
    FAIL() << "expected data_error";
  } catch (const data_error& e) {
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
  }
  EXPECT_THROW(parse_bracketed_tree("(S a))", 20), data_error);
  EXPECT_THROW(parse_bracketed_tree("a", 20), data_error);
  EXPECT_THROW(parse_bracketed_tree("(S ())", 20), data_error);
  EXPECT_THROW(parse_bracketed_tree("( (S a))", 20), data_error);
}

TEST(Trees, ScaffoldFromFrameElements) {
  auto sents = load_str(std::string(kTwoFrameSentence) + "\n");
  ScaffoldInstance sc = scaffold_from_sentence(sents[0], 20);
  EXPECT_EQ(sc.source, ScaffoldInstance::Source::framenet);
  EXPECT_EQ(sc.positive_spans, (std::vector<std::pair<int, int>>{{0, 0}, {2, 3}}));
  ScaffoldInstance capped = scaffold_from_sentence(sents[0], 1);
  EXPECT_EQ(capped.positive_spans, (std::vector<std::pair<int, int>>{{0, 0}}));
}

TEST(Instances, BuildFromAnnotations) {
  auto sents = load_str(std::string(kTwoFrameSentence) + "\n");
  FrameOntology o = tiny_ontology();
  std::vector<std::string> warnings;
  auto insts = build_instances(sents, o, 20, &warnings);
  ASSERT_EQ(insts.size(), 2u);
  EXPECT_TRUE(warnings.empty());

  const ArgInstance& a = insts[0];
  EXPECT_EQ(a.id, "s0:a0");
  EXPECT_EQ(a.frame_id, o.frame_id("Sale"));
  EXPECT_EQ(a.lu_id, o.lu_id("sell.v"));
  ASSERT_EQ(a.gold.size(), 2u);
  EXPECT_EQ(a.gold[0], (Segment{0, 0, 1}));  // Seller is label 1 of Sale
  EXPECT_EQ(a.gold[1], (Segment{2, 3, 2}));  // Goods is label 2

  EXPECT_EQ(insts[1].id, "s0:a1");
  EXPECT_TRUE(insts[1].gold.empty());  // all-null instance
}

TEST(Instances, LongGoldSpanExcluded) {
  auto sents = load_str(
      R"({"tokens":["a","b","c","d"],"pos":["X","X","X","X"],"annotations":[{"target":[0,0],"lu":"sell.v","frame":"Sale",)"
      R"("elements":[{"role":"Goods","span":[1,3]}]}]})"
      "\n");
  std::vector<std::string> warnings;
  auto insts = build_instances(sents, tiny_ontology(), 2, &warnings);
  EXPECT_TRUE(insts.empty());
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("excluded"), std::string::npos);
}

TEST(Instances, UnknownNamesFailOrDefer) {
  auto bad_frame = load_str(
      R"({"tokens":["a"],"pos":["X"],"annotations":[{"target":[0,0],"lu":"sell.v","frame":"Nope","elements":[]}]})"
      "\n");
  EXPECT_THROW(build_instances(bad_frame, tiny_ontology(), 20), data_error);

  auto bad_role = load_str(
      R"({"tokens":["a"],"pos":["X"],"annotations":[{"target":[0,0],"lu":"sell.v","frame":"Sale",)"
      R"("elements":[{"role":"Nope","span":[0,0]}]}]})"
      "\n");
  EXPECT_THROW(build_instances(bad_role, tiny_ontology(), 20), data_error);

  auto new_lu = load_str(
      R"({"tokens":["a"],"pos":["X"],"annotations":[{"target":[0,0],"lu":"new.v","frame":"Sale","elements":[]}]})"
      "\n");
  auto insts = build_instances(new_lu, tiny_ontology(), 20);
  ASSERT_EQ(insts.size(), 1u);
  EXPECT_EQ(insts[0].lu_id, -1);
}
