/* Build: cargo build --release -p obforest-ffi
 *        cc train_predict.c -I../include -L../../../target/release -lobforest_ffi -lm -lpthread -ldl
 * Usage: ./a.out data.csv
 */
#include <stdio.h>
#include <stdlib.h>

#include "obforest.h"

int main(int argc, char **argv) {
  if (argc < 2) {
    fprintf(stderr, "usage: %s data.csv\n", argv[0]);
    return 1;
  }
  ObfDataset *data = NULL;
  ObfStatus st = obf_dataset_load_csv(argv[1], NULL, &data);
  if (st != OBF_STATUS_OK) {
    fprintf(stderr, "load: %s\n", obf_last_error());
    return (int)st;
  }

  ObfTrainOptions opts = obf_train_options_default();
  opts.classifier = OBF_CLASSIFIER_OBRAF_L;
  opts.n_trees = 50;
  opts.seed = 7;
  ObfModel *model = NULL;
  st = obf_model_train(data, &opts, &model);
  obf_dataset_free(data);
  if (st != OBF_STATUS_OK) {
    fprintf(stderr, "train: %s\n", obf_last_error());
    return (int)st;
  }

  size_t d = obf_model_n_features(model);
  double *row = calloc(d, sizeof(double));
  size_t label = 0;
  st = obf_model_predict(model, row, 1, d, &label);
  if (st == OBF_STATUS_OK) {
    printf("origin -> %s (%.1f nodes per tree)\n", obf_model_class_name(model, label),
           obf_model_mean_nodes(model));
  }
  free(row);
  obf_model_free(model);
  return (int)st;
}
