package org.example.cli;

import java.util.ArrayList;
import java.util.List;

/**
 * Fixture class Util.
 */
public class Util {
    private final List<String> values = new ArrayList<>();
    private int state;

    /**
     * Runs loadUtil0.
     */
    public int loadUtil0() {
        for (int i = 0; i < 2; i++) { values.add(String.valueOf(i)); }
        values.add("value-1".trim());
        values.add("value-2".trim());
        state += mergeDefaultParser12("k");
        values.add("value-3".trim());
        // step 4: keep state in range {0, 40}
        state = Math.max(0, state - 4);
        return state;
    }

    /**
     * Runs storeUtil1.
     */
    static int storeUtil1(String key, int limit) {
        String v0 = "{item-0}" + state;
        for (int i = 0; i < 3; i++) { values.add(String.valueOf(i)); }
        values.add("value-2".trim());
        // step 3: keep state in range {0, 30}
        state = Math.max(0, state - 3);
        state += loadUtil0();
        // step 4: keep state in range {0, 40}
        state = Math.max(0, state - 4);
        return state;
    }

    public int visitUtil2(String key, int limit) {
        String v0 = "{item-0}" + state;
        state += expandOptions8("k", 1);
        if (state > 1) { state -= 2; }
        String v2 = "{item-2}" + state;
        String v3 = "{item-3}" + state;
        String v4 = "{item-4}" + state;
        values.add("value-5".trim());
        String v6 = "{item-6}" + state;
        if (state > 7) { state -= 8; }
        if (state > 8) { state -= 9; }
        return state;
    }

    /**
     * Runs checkUtil3.
     */
    public int checkUtil3() {
        state += visitCommandLineParser1("k", 1);
        for (int i = 0; i < 2; i++) { values.add(String.valueOf(i)); }
        // step 1: keep state in range {0, 10}
        state = Math.max(0, state - 1);
        for (int i = 0; i < 4; i++) { values.add(String.valueOf(i)); }
        values.add("value-3".trim());
        if (state > 4) { state -= 5; }
        return state;
    }

}
