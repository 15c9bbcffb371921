#pragma once

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

#include "neraug/corpus.hpp"
#include "neraug/gateway.hpp"
#include "neraug/mask_ops.hpp"
#include "neraug/sample.hpp"

namespace neraug {

using Json = nlohmann::ordered_json;

Json to_json(const MaskSlot& slot, const LabelSchema& schema);
Json to_json(const std::vector<TemplatePiece>& pieces, const LabelSchema& schema);
std::vector<TemplatePiece> pieces_from_json(const Json& j, const LabelSchema& schema);

Json to_json(const AppliedOp& op, const LabelSchema& schema);
AppliedOp applied_op_from_json(const Json& j, const LabelSchema& schema);

/// JSON-lines record for a masked template.
Json to_json(const MaskedTemplate& t, const LabelSchema& schema);

Json to_json(const FillRequest& r, const LabelSchema& schema);
FillRequest fill_request_from_json(const Json& j, const LabelSchema& schema);
Json to_json(const FillResponse& r);
FillResponse fill_response_from_json(const Json& j);
Json to_json(const TypeScoreRequest& r);
TypeScoreRequest type_score_request_from_json(const Json& j);
Json to_json(const TypeScoreResponse& r);
TypeScoreResponse type_score_response_from_json(const Json& j);

Json to_json(const TaggedSentence& s, const LabelSchema& schema);
TaggedSentence sentence_from_json(const Json& j, const LabelSchema& schema);

Json to_json(const AugmentedSample& s, const LabelSchema& schema);
AugmentedSample sample_from_json(const Json& j, const LabelSchema& schema);

std::vector<AugmentedSample> read_samples(std::istream& in, const LabelSchema& schema);
std::vector<AugmentedSample> load_samples(const std::string& path, const LabelSchema& schema);
void write_samples(std::ostream& out, const std::vector<AugmentedSample>& samples, const LabelSchema& schema);

/// {code, message} body used for protocol errors.
Json error_body(const Error& e);

}  // namespace neraug
