#pragma once

#include <string>
#include <utility>
#include <vector>

// Hand-counted against the fixed phrase list (distinct substring matches,
// threshold 3). Shared by the unit and acceptance suites.
inline const std::vector<std::pair<std::string, bool>>& offer_truth_table() {
    static const std::vector<std::pair<std::string, bool>> cases{
        {"i get 2 food and you get 1 water", true},           // 2,1,food,water,i get,you get
        {"hello how are you", false},                         // none
        {"what if i take one firewood", true},                // what if,i take,one,firewood
        {"you can take all the firewood, i take three food", true},
        {"that sounds great, thanks!", false},
        {"i can do 2 waters and 1 food", true},               // can do,2,water,1,food
        {"money is done", false},                             // 'one' inside money/done counts once
        {"we need water to survive", false},                  // water only
        {"one two three", true},                              // exactly at the threshold
        {"i would love some firewood and water", false},      // two phrases
        {"10 dollars", false},                                // '1','0'
        {"123", true},                                        // '1','2','3' as substrings
        {"you get the food i get the water", true},
        {"can you do me a favor", false},
        {"what if we meet halfway", false},
        {"i take it you are happy", false},
        {"all the best to you", false},
        {"give me 3 firewood you can take the water", true},
        {"zero one two", false},                              // one,two = 2
        {"i get food you get firewood", true},
    };
    return cases;
}
