#include "folio/prompts.hpp"

namespace folio::prompts {

std::string instruction(gateway::TaskTag tag) {
    using gateway::TaskTag;
    switch (tag) {
        case TaskTag::relevel:
            return "Rewrite each block so the passage reads at the target grade level. Keep every fact and "
                   "every concept named in the heading. Reply with {\"blocks\":[{\"block_id\",\"text\"}]}.";
        case TaskTag::select_segments:
            return "Pick short spans of the blocks that could be made more relatable to the learner's interest. "
                   "Spans must not overlap and must stay within the character budget. Reply with "
                   "{\"segments\":[{\"block_id\",\"start\",\"end\"}]} using byte offsets.";
        case TaskTag::rewrite_segment:
            return "Rewrite the segment using examples from the learner's interest without changing the facts. "
                   "Reply with {\"text\"}.";
        case TaskTag::slides:
            return "Produce a short class-like slide deck covering every section. Open with an interest-capturing "
                   "question and suggest an activity. Reply with {\"slides\":[{\"title\",\"bullets\","
                   "\"section_refs\",\"visual_brief\",\"opener_question\",\"activity\"}],\"omissions\":[]}.";
        case TaskTag::narration:
            return "Write a natural spoken narration for this slide, as in a recorded lesson. It may go beyond "
                   "the slide text. Reply with {\"text\"}.";
        case TaskTag::concept_graph:
            return "List the key concepts of the material and the relations between them as a connected graph. "
                   "Reply with {\"nodes\":[{\"id\",\"label\",\"summary\"}],\"edges\":[{\"from\",\"to\","
                   "\"relation\"}]}.";
        case TaskTag::dialogue_turn:
            return "Continue the lesson conversation with one turn in your persona. Reply with {\"text\","
                   "\"revealed_concepts\"}.";
        case TaskTag::mindmap:
            return "Organize the material as a mind map with one first-level node per top-level section, in "
                   "order. Annotate leaves with a short text or an image reference drawn from the material. "
                   "Reply with {\"root\":{\"label\",\"children\"}}.";
        case TaskTag::timeline:
            return "Find sequences (events, stages, steps) in the material. Use labels that appear in the "
                   "section text. Reply with {\"candidates\":[{\"section_id\",\"items\":[{\"label\","
                   "\"description\"}]}]}.";
        case TaskTag::mnemonic:
            return "Write a coherent, memorable sentence whose words start, in order, with the first letters of "
                   "the items and that relates to the material. Reply with {\"items\",\"sentence\"}.";
        case TaskTag::illustration_brief:
            return "Choose passages worth illustrating and describe a simple educational picture themed on the "
                   "learner's interest. Reply with {\"illustrations\":[{\"block_id\",\"brief\",\"caption\"}]}.";
        case TaskTag::embedded_question:
            return "Write one multiple-choice question grounded in the anchor text. Reply with {\"stem\","
                   "\"options\",\"correct_index\",\"difficulty\",\"topic_tag\",\"feedback\"}.";
        case TaskTag::quiz:
            return "Write 5 to 10 multiple-choice questions of mixed difficulty covering the whole section. "
                   "Reply with {\"questions\":[...]}.";
        case TaskTag::quiz_feedback:
            return "Summarize the learner's quiz result, naming strengths and areas to improve. Reply with "
                   "{\"text\"}.";
    }
    return {};
}

Json outline(const doc::SourceDocument& doc) {
    Json out = Json::array();
    for (const auto& s : doc.sections) {
        Json blocks = Json::array();
        for (const auto& b : s.blocks) blocks.push_back({{"id", b.id}, {"kind", doc::to_string(b.kind)}, {"text", b.text}});
        out.push_back({{"id", s.id},
                       {"heading", s.heading},
                       {"depth", s.depth},
                       {"text", doc::SourceDocument::section_text(s)},
                       {"blocks", blocks}});
    }
    return out;
}

gateway::GenerationRequest make_request(gateway::TaskTag tag, std::uint64_t seed, std::string_view salt) {
    gateway::GenerationRequest req;
    req.task = tag;
    req.seed = gateway::derive_seed(seed, salt);
    req.add(std::string(kInstruction), instruction(tag));
    return req;
}

}  // namespace folio::prompts
