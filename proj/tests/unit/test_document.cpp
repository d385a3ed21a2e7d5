#include <gtest/gtest.h>

#include "folio/document.hpp"
#include "test_support.hpp"

using namespace folio;
using folio::testing::random_document;

TEST(Ingest, SingleSectionParagraph) {
    auto d = doc::ingest("# T\n\nHello world.");
    ASSERT_EQ(d.sections.size(), 1u);
    EXPECT_EQ(d.sections[0].heading, "T");
    EXPECT_EQ(d.sections[0].depth, 1);
    ASSERT_EQ(d.sections[0].blocks.size(), 1u);
    EXPECT_EQ(d.sections[0].blocks[0].kind, doc::BlockKind::paragraph);
    EXPECT_EQ(d.sections[0].blocks[0].text, "Hello world.");
    EXPECT_EQ(d.sections[0].blocks[0].char_length(), 12u);
}

TEST(Ingest, NestedHeadings) {
    auto d = doc::ingest("# A\n## B\ntext");
    ASSERT_EQ(d.sections.size(), 2u);
    EXPECT_EQ(d.sections[0].heading, "A");
    EXPECT_TRUE(d.sections[0].blocks.empty());
    EXPECT_EQ(d.sections[1].heading, "B");
    EXPECT_EQ(d.sections[1].depth, 2);
    EXPECT_EQ(d.sections[1].blocks.at(0).text, "text");
}

TEST(Ingest, EmptyInputRejected) {
    EXPECT_THROW(doc::ingest(""), EmptyInput);
    EXPECT_THROW(doc::ingest("  \n\t\n"), EmptyInput);
}

TEST(Ingest, DepthJumpReportsLine) {
    try {
        doc::ingest("# A\n\ntext\n\n### C\n\nmore");
        FAIL() << "expected MalformedHeadingNesting";
    } catch (const MalformedHeadingNesting& e) {
        EXPECT_EQ(e.line_number, 5);
        EXPECT_EQ(e.code(), "MalformedHeadingNesting");
    }
}

TEST(Ingest, LeafHeadingWithoutContentRejected) {
    EXPECT_THROW(doc::ingest("# A\n\ntext\n\n## Empty\n"), ValidationError);
}

TEST(Ingest, BlockKinds) {
    auto d = doc::ingest("# A\n\n- one\n- two\n\nFigure 2: a cart.\n\n| a | b |\n| 1 | 2 |\n\nPlain words here.");
    const auto& b = d.sections[0].blocks;
    ASSERT_EQ(b.size(), 4u);
    EXPECT_EQ(b[0].kind, doc::BlockKind::list);
    EXPECT_EQ(b[0].text, "- one\n- two");
    EXPECT_EQ(b[1].kind, doc::BlockKind::figure_caption);
    EXPECT_EQ(b[2].kind, doc::BlockKind::table_text);
    EXPECT_EQ(b[3].kind, doc::BlockKind::paragraph);
}

TEST(Ingest, WhitespaceNormalizedInParagraphs) {
    auto d = doc::ingest("# A\n\nline one\n   line   two\n");
    EXPECT_EQ(d.sections[0].blocks[0].text, "line one line two");
}

TEST(Flatten, OneSection) { EXPECT_EQ(doc::flatten_text(doc::ingest("# T\n\nHello world.")), "T\n\nHello world."); }

TEST(Flatten, HeadingsInOrder) {
    auto flat = doc::flatten_text(doc::ingest("# A\n\nfirst\n\n# B\n\nsecond"));
    EXPECT_EQ(flat, "A\n\nfirst\n\nB\n\nsecond");
    EXPECT_LT(flat.find('A'), flat.find('B'));
}

TEST(Document, JsonRoundTrip) {
    auto d = folio::testing::load_doc("newtons_third_law");
    EXPECT_EQ(doc::document_from_json(doc::to_json(d)), d);
}

TEST(Document, IdsStableAcrossIngestion) {
    const auto raw = folio::testing::read_file(folio::testing::fixture("documents/economies.txt"));
    auto a = doc::ingest(raw);
    auto b = doc::ingest(raw, "somewhere/else.txt");
    EXPECT_EQ(a.id, b.id);
    for (std::size_t i = 0; i < a.sections.size(); ++i) {
        EXPECT_EQ(a.sections[i].id, b.sections[i].id);
        for (std::size_t k = 0; k < a.sections[i].blocks.size(); ++k)
            EXPECT_EQ(a.sections[i].blocks[k].id, b.sections[i].blocks[k].id);
    }
}

TEST(DocumentProperty, InvariantsAndRoundTrip) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const auto raw = random_document(rng);
        auto d = doc::ingest(raw);
        std::set<std::string> ids;
        for (std::size_t i = 0; i < d.sections.size(); ++i) {
            EXPECT_TRUE(ids.insert(d.sections[i].id).second) << raw;
            if (i > 0) EXPECT_LE(d.sections[i].depth, d.sections[i - 1].depth + 1);
            for (const auto& b : d.sections[i].blocks) {
                EXPECT_FALSE(b.text.empty());
                EXPECT_EQ(b.char_length(), b.text.size());
            }
        }
        // Re-ingesting the marked rendering gives a structurally identical document.
        EXPECT_EQ(doc::ingest(doc::render_marked(d)), d) << raw;
        // Flattened text carries every heading and block in reading order.
        const auto flat = doc::flatten_text(d);
        std::size_t at = 0;
        for (const auto& s : d.sections) {
            at = flat.find(s.heading, at);
            ASSERT_NE(at, std::string::npos);
            for (const auto& b : s.blocks) {
                at = flat.find(b.text, at);
                ASSERT_NE(at, std::string::npos);
            }
        }
    }
}

TEST(Profile, CatalogAndGrades) {
    EXPECT_NO_THROW(doc::validate_profile(folio::testing::profile(7, "basketball"), doc::default_interest_catalog()));
    EXPECT_THROW(doc::validate_profile(folio::testing::profile(7, "skydiving"), doc::default_interest_catalog()),
                 ValidationError);
    EXPECT_THROW(doc::GradeLevel(0), ValidationError);
    EXPECT_THROW(doc::GradeLevel::parse("14"), ValidationError);
    EXPECT_EQ(doc::GradeLevel::parse("undergraduate").numeric(), 13.0);
    auto p = folio::testing::profile(10, "music");
    EXPECT_EQ(doc::profile_from_json(doc::to_json(p)), p);
}
