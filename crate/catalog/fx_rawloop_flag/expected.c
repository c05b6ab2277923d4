#include <iostream>
#include <algorithm>
#include <functional>

bool contains7(int arr[])
{
    log_scan();
    const bool result =
      (find(begin(arr),end(arr),7) !=
       end(arr));
    return result;
}
