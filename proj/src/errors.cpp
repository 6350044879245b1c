#include "tattooed/errors.hpp"

namespace tattooed {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kKeyFormat: return "key_format";
    case ErrorKind::kEmptyCode: return "empty_code";
    case ErrorKind::kSelection: return "selection";
    case ErrorKind::kCodeConstruction: return "code_construction";
    case ErrorKind::kEncode: return "encode";
    case ErrorKind::kEmbed: return "embed";
    case ErrorKind::kExtract: return "extract";
    case ErrorKind::kChannelLost: return "channel_lost";
    case ErrorKind::kCapacity: return "capacity";
    case ErrorKind::kBaselineMismatch: return "baseline_mismatch";
    case ErrorKind::kAccuracy: return "accuracy";
    case ErrorKind::kShuffle: return "shuffle";
    case ErrorKind::kDegenerateNeuron: return "degenerate_neuron";
    case ErrorKind::kRecoveryFailed: return "recovery_failed";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kRecord: return "record";
    case ErrorKind::kAttack: return "attack";
  }
  return "unknown";
}

}  // namespace tattooed
