#pragma once

#include "upbench/models/model.hpp"

namespace upbench::models::detail {

class SLearner final : public UpliftModel {
 public:
  SLearner(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed);
};

class TLearner final : public UpliftModel {
 public:
  TLearner(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed);
};

class Bnn final : public UpliftModel {
 public:
  Bnn(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed);
};

// TARNet, and CFRNet when `balance` adds the representation MMD.
class TarNet final : public UpliftModel {
 public:
  TarNet(ModelKind kind, std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed);
};

class DragonNet final : public UpliftModel {
 public:
  DragonNet(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed);
};

class SNet final : public UpliftModel {
 public:
  SNet(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed);
};

class FlexTENet final : public UpliftModel {
 public:
  FlexTENet(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed);
};

class Cevae final : public UpliftModel {
 public:
  Cevae(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed);
};

class Ganite final : public UpliftModel {
 public:
  Ganite(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed);
  std::vector<Objective> objectives() override;

 private:
  nn::Var generator_loss_;
  nn::Var discriminator_loss_;
  std::vector<nn::Parameter*> generator_params_;
  std::vector<nn::Parameter*> discriminator_params_;
};

class Euen final : public UpliftModel {
 public:
  Euen(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed);
};

class Descn final : public UpliftModel {
 public:
  Descn(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed);
};

class Efin final : public UpliftModel {
 public:
  Efin(std::size_t k, const ModelHyperparams& hp, bool fn, std::uint64_t seed);
};

}  // namespace upbench::models::detail
