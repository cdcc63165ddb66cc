#include <stdio.h>
#include <string.h>

#include "privacy_controller.h"

static const char *RECORD =
    "{\"id\": \"c1\","
    " \"transcript\": [{\"speaker\": \"ann\", \"text\": \"I lost my job.\"},"
    "                {\"speaker\": \"ann\", \"text\": \"Don't tell anyone this.\"},"
    "                {\"speaker\": \"bob\", \"text\": \"I won't.\"}],"
    " \"context\": {\"participants\": [\"ann\", \"bob\"], \"location\": \"domestic\"}}";

int main(void) {
    PcEngine *engine = NULL;
    if (pc_engine_new(NULL, &engine) != PC_STATUS_OK) {
        fprintf(stderr, "new: %s\n", pc_last_error_message());
        return 1;
    }

    PcLevel level;
    if (pc_engine_predict(engine, RECORD, &level) != PC_STATUS_OK || level != PC_LEVEL_HIGH) {
        fprintf(stderr, "predict failed\n");
        return 1;
    }

    PcAction action;
    if (pc_engine_gate(engine, RECORD, "eve", NULL, &action) != PC_STATUS_OK || action != PC_ACTION_REFUSE) {
        fprintf(stderr, "gate failed\n");
        return 1;
    }

    char *json = NULL;
    if (pc_engine_explain(engine, RECORD, &json) != PC_STATUS_OK || strstr(json, "\"overridden\":true") == NULL) {
        fprintf(stderr, "explain failed\n");
        return 1;
    }
    pc_string_free(json);

    if (pc_engine_predict(engine, "{", &level) != PC_STATUS_PARSE_ERROR) {
        fprintf(stderr, "bad JSON accepted\n");
        return 1;
    }

    double s = 0.0;
    pc_similarity("don't tell anyone this", "please don't tell anyone", &s);
    pc_engine_free(engine);
    printf("ok %.2f\n", s);
    return 0;
}
