#pragma once

#include "gce/apriori.hpp"
#include "gce/dataset.hpp"
#include "gce/error.hpp"
#include "gce/evaluation.hpp"
#include "gce/fixture.hpp"
#include "gce/ground_set.hpp"
#include "gce/io.hpp"
#include "gce/itemset.hpp"
#include "gce/model.hpp"
#include "gce/objective.hpp"
#include "gce/optimizer.hpp"
#include "gce/pipeline.hpp"
#include "gce/row_set.hpp"
#include "gce/schema.hpp"
#include "gce/triple.hpp"
