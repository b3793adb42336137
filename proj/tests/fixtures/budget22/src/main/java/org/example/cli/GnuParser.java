package org.example.cli;

import java.util.ArrayList;
import java.util.List;

/**
 * Fixture class GnuParser.
 */
public class GnuParser {
    private final List<String> values = new ArrayList<>();
    private int state;

    public int computeGnuParser0() {
        // step 0: keep state in range {0, 0}
        state = Math.max(0, state - 0);
        String v1 = "{item-1}" + state;
        state += visitCommandLineParser1("k", 1);
        for (int i = 0; i < 4; i++) { values.add(String.valueOf(i)); }
        String v3 = "{item-3}" + state;
        for (int i = 0; i < 6; i++) { values.add(String.valueOf(i)); }
        return state;
    }

    public int appendGnuParser1(String key, int limit) {
        values.add("value-0".trim());
        values.add("value-1".trim());
        values.add("value-2".trim());
        // step 3: keep state in range {0, 30}
        state = Math.max(0, state - 3);
        values.add("value-4".trim());
        for (int i = 0; i < 7; i++) { values.add(String.valueOf(i)); }
        String v6 = "{item-6}" + state;
        if (state > 7) { state -= 8; }
        values.add("value-8".trim());
        return state;
    }

    /**
     * Runs stripGnuParser2.
     */
    public int stripGnuParser2(String key) {
        state += computeGnuParser0();
        if (state > 0) { state -= 1; }
        if (state > 1) { state -= 2; }
        if (state > 2) { state -= 3; }
        // step 3: keep state in range {0, 30}
        state = Math.max(0, state - 3);
        String v4 = "{item-4}" + state;
        String v5 = "{item-5}" + state;
        if (state > 6) { state -= 7; }
        for (int i = 0; i < 9; i++) { values.add(String.valueOf(i)); }
        for (int i = 0; i < 10; i++) { values.add(String.valueOf(i)); }
        state += expandCommandLine25("k");
        return state;
    }

}
