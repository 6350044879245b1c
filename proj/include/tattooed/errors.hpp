#pragma once

#include <stdexcept>
#include <string>

namespace tattooed {

/// Broad error classes. The CLI maps each class to its own exit code.
enum class ErrorKind {
  kKeyFormat,
  kEmptyCode,
  kSelection,
  kCodeConstruction,
  kEncode,
  kEmbed,
  kExtract,
  kChannelLost,
  kCapacity,
  kBaselineMismatch,
  kAccuracy,
  kShuffle,
  kDegenerateNeuron,
  kRecoveryFailed,
  kFormat,
  kRecord,
  kAttack,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define TATTOOED_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

TATTOOED_DEFINE_ERROR(KeyFormatError, kKeyFormat)
TATTOOED_DEFINE_ERROR(EmptyCodeError, kEmptyCode)
TATTOOED_DEFINE_ERROR(SelectionError, kSelection)
TATTOOED_DEFINE_ERROR(CodeConstructionError, kCodeConstruction)
TATTOOED_DEFINE_ERROR(EncodeError, kEncode)
TATTOOED_DEFINE_ERROR(EmbedError, kEmbed)
TATTOOED_DEFINE_ERROR(ExtractError, kExtract)
TATTOOED_DEFINE_ERROR(ChannelLostError, kChannelLost)
TATTOOED_DEFINE_ERROR(CapacityError, kCapacity)
TATTOOED_DEFINE_ERROR(BaselineMismatchError, kBaselineMismatch)
TATTOOED_DEFINE_ERROR(AccuracyError, kAccuracy)
TATTOOED_DEFINE_ERROR(ShuffleError, kShuffle)
TATTOOED_DEFINE_ERROR(DegenerateNeuronError, kDegenerateNeuron)
TATTOOED_DEFINE_ERROR(FormatError, kFormat)
TATTOOED_DEFINE_ERROR(RecordError, kRecord)
TATTOOED_DEFINE_ERROR(AttackError, kAttack)

#undef TATTOOED_DEFINE_ERROR

/// Raised when no neuron matching above the similarity floor exists.
/// `layer` is the hidden-layer index, or -1 when raised outside a model walk.
class RecoveryFailedError : public Error {
 public:
  RecoveryFailedError(const std::string& what, int layer = -1)
      : Error(ErrorKind::kRecoveryFailed, what), layer_(layer) {}

  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

}  // namespace tattooed
