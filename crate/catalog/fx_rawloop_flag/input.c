#include <iostream>

bool contains7(int arr[])
{
    bool result = false;
    log_scan();
    for ( int &elem : arr )
        if ( elem == 7 )
        {
            trace(elem);
            result = true;
            break;
        }
    return result;
}
